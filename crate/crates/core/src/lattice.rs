//! Lattices in R^{2g}, complex structures, real subspaces and the
//! full / complex / full-complex closure operators.
//!
//! Two coordinate frames are in play: *ambient* coordinates
//! `(Re z1, Im z1, ..., Re zg, Im zg)` and *lattice* coordinates with respect
//! to a fixed basis `B` of the lattice (so the lattice itself is `Z^{2g}`).
//! A subspace is full exactly when it has a rational basis in the lattice
//! frame, which is how the full closure is computed.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hnf::{column_hnf, hnf_row_basis, primitive_integer_vector};
use crate::linalg::{self, Matrix};
use crate::quad::{common_field, QuadNumber};
use crate::scalar::{IntegerRing, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Ambient,
    Lattice,
}

/// A full-rank lattice in R^n given by the columns of `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct Lattice<I: IntegerRing> {
    /// Basis vectors (the columns of `B`) in ambient coordinates.
    basis: Vec<Vec<QuadNumber<I>>>,
    #[serde(skip)]
    frame_matrix: Matrix<QuadNumber<I>>,
    #[serde(skip)]
    frame_inverse: Matrix<QuadNumber<I>>,
}

impl<I: IntegerRing> Lattice<I> {
    /// Builds a lattice from `2g` basis vectors in ambient coordinates.
    pub fn new(basis: Vec<Vec<QuadNumber<I>>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 || n % 2 != 0 {
            return Err(Error::DegenerateLattice(format!("expected an even number of basis vectors, got {n}")));
        }
        for v in &basis {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        common_field(basis.iter().flatten())?;
        let frame_matrix = linalg::transpose(&basis, n);
        let frame_inverse = linalg::inverse(&frame_matrix)?;
        Ok(Lattice { basis, frame_matrix, frame_inverse })
    }

    /// Re-establishes the cached frame matrices after deserialization.
    pub fn rebuilt(self) -> Result<Self> {
        Self::new(self.basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn genus(&self) -> usize {
        self.dim() / 2
    }

    pub fn basis(&self) -> &[Vec<QuadNumber<I>>] {
        &self.basis
    }

    /// `B`, whose columns are the basis vectors.
    pub fn frame_matrix(&self) -> &Matrix<QuadNumber<I>> {
        &self.frame_matrix
    }

    pub fn frame_inverse(&self) -> &Matrix<QuadNumber<I>> {
        &self.frame_inverse
    }

    pub fn field(&self) -> Option<I> {
        common_field(self.basis.iter().flatten()).ok().flatten()
    }

    /// Same lattice with basis `B U` for a unimodular integer matrix `U`.
    pub fn change_basis(&self, unimodular: &[Vec<i64>]) -> Result<Self> {
        let n = self.dim();
        let u: Matrix<QuadNumber<I>> = unimodular
            .iter()
            .map(|row| row.iter().map(|&x| QuadNumber::from_int(x)).collect())
            .collect();
        let det_check = linalg::inverse(&u)?;
        let integral = det_check.iter().flatten().all(|x| x.is_rational() && x.rational_part().is_integer());
        if !integral {
            return Err(Error::DegenerateLattice("basis change is not unimodular".into()));
        }
        let bu = linalg::mat_mul(&self.frame_matrix, &u);
        Self::new(linalg::transpose(&bu, n))
    }

    pub fn to_lattice_coords(&self, v: &[QuadNumber<I>]) -> Vec<QuadNumber<I>> {
        linalg::mat_vec(&self.frame_inverse, v)
    }

    pub fn to_ambient_coords(&self, v: &[QuadNumber<I>]) -> Vec<QuadNumber<I>> {
        linalg::mat_vec(&self.frame_matrix, v)
    }

    /// Ambient vector of the lattice point with integer coordinates `k`.
    pub fn lattice_point(&self, k: &[I]) -> Vec<QuadNumber<I>> {
        let v: Vec<QuadNumber<I>> = k.iter().map(|x| QuadNumber::rational(Ratio::from_integer(x.clone()))).collect();
        self.to_ambient_coords(&v)
    }
}

/// Multiplication by `i`, as a real matrix in both frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct ComplexStructure<I: IntegerRing> {
    pub j: Matrix<QuadNumber<I>>,
    pub j_lattice: Matrix<QuadNumber<I>>,
}

impl<I: IntegerRing> ComplexStructure<I> {
    /// `J` in ambient coordinates, checked to square to `-I` in both frames.
    pub fn new(j: Matrix<QuadNumber<I>>, lattice: &Lattice<I>) -> Result<Self> {
        let n = lattice.dim();
        if j.len() != n || j.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: j.len() });
        }
        let minus_id: Matrix<QuadNumber<I>> =
            linalg::identity::<QuadNumber<I>>(n).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
        if linalg::mat_mul(&j, &j) != minus_id {
            return Err(Error::InvalidComplexStructure("J^2 != -I".into()));
        }
        let j_lattice = linalg::mat_mul(&lattice.frame_inverse, &linalg::mat_mul(&j, &lattice.frame_matrix));
        if linalg::mat_mul(&j_lattice, &j_lattice) != minus_id {
            return Err(Error::InvalidComplexStructure("J^2 != -I in lattice frame".into()));
        }
        Ok(ComplexStructure { j, j_lattice })
    }

    /// The standard structure on C^g with ambient order `(Re z1, Im z1, ...)`.
    pub fn standard(lattice: &Lattice<I>) -> Result<Self> {
        let n = lattice.dim();
        let mut j = vec![vec![QuadNumber::zero(); n]; n];
        for k in 0..n / 2 {
            // i * (x + i y) = -y + i x
            j[2 * k][2 * k + 1] = QuadNumber::from_int(-1);
            j[2 * k + 1][2 * k] = QuadNumber::one();
        }
        Self::new(j, lattice)
    }

    pub fn matrix(&self, frame: Frame) -> &Matrix<QuadNumber<I>> {
        match frame {
            Frame::Ambient => &self.j,
            Frame::Lattice => &self.j_lattice,
        }
    }
}

/// A real subspace stored as the nonzero rows of its reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct Subspace<I: IntegerRing> {
    frame: Frame,
    dim: usize,
    vectors: Vec<Vec<QuadNumber<I>>>,
}

impl<I: IntegerRing> Subspace<I> {
    pub fn zero(frame: Frame, ambient_dim: usize) -> Self {
        Subspace { frame, dim: ambient_dim, vectors: Vec::new() }
    }

    pub fn whole(frame: Frame, ambient_dim: usize) -> Self {
        Subspace { frame, dim: ambient_dim, vectors: linalg::identity(ambient_dim) }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Dimension of the ambient space R^n.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Real dimension of the subspace.
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<QuadNumber<I>>] {
        &self.vectors
    }

    pub fn contains_vector(&self, v: &[QuadNumber<I>]) -> bool {
        let mut rows = self.vectors.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows, self.dim) == self.rank()
    }

    /// `self ⊆ other` (same frame required).
    pub fn is_subspace_of(&self, other: &Subspace<I>) -> bool {
        assert_eq!(self.frame, other.frame, "subspace comparison across frames");
        self.vectors.iter().all(|v| other.contains_vector(v))
    }

    /// `self + other`.
    pub fn join(&self, other: &Subspace<I>) -> Subspace<I> {
        assert_eq!(self.frame, other.frame, "subspace join across frames");
        let rows: Vec<_> = self.vectors.iter().chain(&other.vectors).cloned().collect();
        Subspace { frame: self.frame, dim: self.dim, vectors: linalg::row_basis(&rows, self.dim) }
    }

    /// The same subspace expressed in `target` coordinates.
    pub fn to_frame(&self, target: Frame, lattice: &Lattice<I>) -> Result<Subspace<I>> {
        if lattice.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: lattice.dim(), found: self.dim });
        }
        if target == self.frame {
            return Ok(self.clone());
        }
        let mapped: Vec<_> = self
            .vectors
            .iter()
            .map(|v| match target {
                Frame::Lattice => lattice.to_lattice_coords(v),
                Frame::Ambient => lattice.to_ambient_coords(v),
            })
            .collect();
        Ok(Subspace { frame: target, dim: self.dim, vectors: linalg::row_basis(&mapped, self.dim) })
    }

    /// Float copies of the stored basis vectors.
    pub fn float_vectors<F: Real>(&self) -> Vec<Vec<F>> {
        self.vectors.iter().map(|v| v.iter().map(|x| x.to_float()).collect()).collect()
    }
}

/// Canonical span of `vectors` in the given frame. Empty input gives `{0}`.
pub fn subspace_span<I: IntegerRing>(frame: Frame, ambient_dim: usize, vectors: &[Vec<QuadNumber<I>>]) -> Result<Subspace<I>> {
    for v in vectors {
        if v.len() != ambient_dim {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
        }
    }
    common_field(vectors.iter().flatten())?;
    Ok(Subspace { frame, dim: ambient_dim, vectors: linalg::row_basis(vectors, ambient_dim) })
}

fn check_compatible<I: IntegerRing>(h: &Subspace<I>, lattice: &Lattice<I>) -> Result<()> {
    if h.dim != lattice.dim() {
        return Err(Error::DimensionMismatch { expected: lattice.dim(), found: h.dim });
    }
    let mut field = lattice.field();
    if let Some(hf) = common_field(h.vectors.iter().flatten())? {
        match &field {
            Some(lf) if *lf != hf => {
                return Err(Error::FieldMismatch { left: lf.to_string(), right: hf.to_string() });
            }
            _ => field = Some(hf),
        }
    }
    let _ = field;
    Ok(())
}

/// Smallest full subspace containing `h`: the rational closure in the
/// lattice frame, obtained from the `1` and `sqrt(d)` components of every
/// spanning vector. The result is returned in the frame of `h`.
pub fn full_closure<I: IntegerRing>(h: &Subspace<I>, lattice: &Lattice<I>) -> Result<Subspace<I>> {
    check_compatible(h, lattice)?;
    let in_lattice = h.to_frame(Frame::Lattice, lattice)?;
    let mut rows = Vec::with_capacity(2 * in_lattice.rank());
    for v in &in_lattice.vectors {
        let (a, b) = crate::quad::rational_components(v)?;
        rows.push(a.into_iter().map(QuadNumber::rational).collect::<Vec<_>>());
        rows.push(b.into_iter().map(QuadNumber::rational).collect::<Vec<_>>());
    }
    let closed = subspace_span(Frame::Lattice, h.dim, &rows)?;
    closed.to_frame(h.frame, lattice)
}

/// `h + J h`, the complex subspace generated by `h`.
pub fn complex_closure<I: IntegerRing>(h: &Subspace<I>, j: &ComplexStructure<I>) -> Result<Subspace<I>> {
    let jm = j.matrix(h.frame);
    if jm.len() != h.dim {
        return Err(Error::DimensionMismatch { expected: jm.len(), found: h.dim });
    }
    let mut rows = h.vectors.clone();
    rows.extend(h.vectors.iter().map(|v| linalg::mat_vec(jm, v)));
    subspace_span(h.frame, h.dim, &rows)
}

/// Fixpoint of `H -> f(c(H))`: the smallest full complex subspace containing `h`.
pub fn fc_closure<I: IntegerRing>(h: &Subspace<I>, lattice: &Lattice<I>, j: &ComplexStructure<I>) -> Result<Subspace<I>> {
    let mut cur = h.to_frame(Frame::Lattice, lattice)?;
    // Each non-final step strictly increases the dimension.
    for _ in 0..=h.dim {
        let next = full_closure(&complex_closure(&cur, j)?, lattice)?;
        if next == cur {
            return cur.to_frame(h.frame, lattice);
        }
        cur = next;
    }
    unreachable!("closure iteration exceeded the ambient dimension")
}

/// Saturated sublattice `Λ ∩ K` in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIntersection {
    /// Hermite basis of `Z^n ∩ K`, one integer vector per row.
    pub basis: Vec<Vec<BigInt>>,
    /// `false` when `K` is not rational in the lattice frame, so that only
    /// its rational part was intersected (rank below `dim K`).
    pub full: bool,
}

impl LatticeIntersection {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// Integer equations `M x = 0` cutting out the rational part of `k` (lattice frame).
fn rational_equations<I: IntegerRing>(k: &Subspace<I>) -> Result<Vec<Vec<I>>> {
    debug_assert_eq!(k.frame, Frame::Lattice);
    let annihilator = linalg::nullspace(&k.vectors, k.dim);
    let mut eqs = Vec::new();
    for a in &annihilator {
        let (p, q) = crate::quad::rational_components(a)?;
        for part in [p, q] {
            if part.iter().any(|x| !x.is_zero()) {
                eqs.push(primitive_integer_vector(&part));
            }
        }
    }
    Ok(eqs)
}

/// Basis of the saturated lattice `Λ ∩ K`, computed from the rational
/// membership system of `K` through a column Hermite normal form.
pub fn lattice_intersection<I: IntegerRing>(k: &Subspace<I>, lattice: &Lattice<I>) -> Result<LatticeIntersection> {
    check_compatible(k, lattice)?;
    let k_lat = k.to_frame(Frame::Lattice, lattice)?;
    let n = k.dim;
    if k_lat.rank() == 0 {
        return Ok(LatticeIntersection { basis: Vec::new(), full: true });
    }
    let eqs = rational_equations(&k_lat)?;
    let kernel: Vec<Vec<I>> = if eqs.is_empty() {
        (0..n).map(|i| (0..n).map(|j| if i == j { I::one() } else { I::zero() }).collect()).collect()
    } else {
        column_hnf(&eqs, n).kernel()
    };
    let basis: Vec<Vec<BigInt>> = hnf_row_basis(&kernel, n)
        .into_iter()
        .map(|row| row.iter().map(|x| x.to_bigint()).collect())
        .collect();
    let full = basis.len() == k_lat.rank();
    Ok(LatticeIntersection { basis, full })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_full: bool,
    pub is_complex: bool,
}

pub fn subspace_classify<I: IntegerRing>(h: &Subspace<I>, lattice: &Lattice<I>, j: &ComplexStructure<I>) -> Result<Classification> {
    let is_full = lattice_intersection(h, lattice)?.rank() == h.rank();
    let is_complex = complex_closure(h, j)? == *h;
    Ok(Classification { is_full, is_complex })
}

/// Translate `z + H` of a full complex subspace (lattice frame).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct TorusCoset<I: IntegerRing> {
    pub base: Vec<QuadNumber<I>>,
    pub direction: Subspace<I>,
}

impl<I: IntegerRing> TorusCoset<I> {
    pub fn new(base: Vec<QuadNumber<I>>, direction: Subspace<I>, lattice: &Lattice<I>, j: &ComplexStructure<I>) -> Result<Self> {
        let direction = direction.to_frame(Frame::Lattice, lattice)?;
        if base.len() != direction.dim {
            return Err(Error::DimensionMismatch { expected: direction.dim, found: base.len() });
        }
        let class = subspace_classify(&direction, lattice, j)?;
        if !(class.is_full && class.is_complex) {
            return Err(Error::Validation(format!(
                "coset direction must be full and complex (full={}, complex={})",
                class.is_full, class.is_complex
            )));
        }
        Ok(TorusCoset { base, direction })
    }

    /// Whether the rational lattice-frame point `r` lies on `base + H + Z^n`.
    pub fn contains_rational_point(&self, r: &[Ratio<I>]) -> Result<bool> {
        let n = self.direction.dim;
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        if !self.base.iter().all(|x| x.is_rational()) {
            return Err(Error::Validation("coset base point is not rational".into()));
        }
        let diff: Vec<Ratio<I>> = r.iter().zip(&self.base).map(|(a, b)| a.clone() - b.rational_part().clone()).collect();
        let eqs = rational_equations(&self.direction)?;
        if eqs.is_empty() {
            return Ok(true);
        }
        let lhs: Vec<Ratio<I>> = eqs
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&diff)
                    .fold(Ratio::zero(), |acc, (a, x)| acc + Ratio::from_integer(a.clone()) * x.clone())
            })
            .collect();
        Ok(column_hnf(&eqs, n).solve_integral(&lhs).is_some())
    }
}

/// Numerical density check for `f(H) = K`: the smallest ambient distance
/// from `point` (lattice coordinates, lying in `K`) to `H + λ` over lattice
/// vectors `λ ∈ Λ ∩ K` with Hermite coefficients bounded by `radius`.
pub fn density_gap<I: IntegerRing>(h: &Subspace<I>, lattice: &Lattice<I>, point: &[f64], radius: i64) -> Result<f64> {
    let k = full_closure(h, lattice)?;
    let gens = lattice_intersection(&k, lattice)?.basis;
    let h_amb = h.to_frame(Frame::Ambient, lattice)?.float_vectors::<f64>();
    let ortho = gram_schmidt(&h_amb);
    let b: Vec<Vec<f64>> = lattice.frame_matrix().iter().map(|r| r.iter().map(|x| x.to_float()).collect()).collect();
    let to_amb = |v: &[f64]| -> Vec<f64> { b.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect() };
    let p_amb = to_amb(point);
    let gens_amb: Vec<Vec<f64>> = gens
        .iter()
        .map(|g| to_amb(&g.iter().map(|x| num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)).collect::<Vec<_>>()))
        .collect();
    let dist_to_h = |v: &[f64]| -> f64 {
        let mut r = v.to_vec();
        for e in &ortho {
            let c: f64 = r.iter().zip(e).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    };
    let k_rank = gens_amb.len();
    let side = (2 * radius + 1) as usize;
    let total = side.checked_pow(k_rank as u32).unwrap_or(usize::MAX);
    if total > 50_000_000 {
        return Err(Error::Validation(format!("density search too large: {total} candidates")));
    }
    let mut best = f64::INFINITY;
    let mut coeffs = vec![-radius; k_rank];
    for _ in 0..total {
        let mut v = p_amb.clone();
        for (c, g) in coeffs.iter().zip(&gens_amb) {
            for (x, y) in v.iter_mut().zip(g) {
                *x -= *c as f64 * y;
            }
        }
        best = best.min(dist_to_h(&v));
        for c in coeffs.iter_mut() {
            *c += 1;
            if *c <= radius {
                break;
            }
            *c = -radius;
        }
    }
    Ok(best)
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for e in &out {
            let c: f64 = w.iter().zip(e).map(|(x, y)| x * y).sum();
            for (x, y) in w.iter_mut().zip(e) {
                *x -= c * y;
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    out
}
