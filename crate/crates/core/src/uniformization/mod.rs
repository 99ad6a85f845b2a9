//! Analytic uniformization `C^g / Λ -> E_1 × ... × E_g` of a product of
//! elliptic curves, the torsion / rational-point dictionary and a
//! ball-arithmetic membership oracle for `Z = β^{-1}(X)`.

pub mod variety;
pub mod weierstrass;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ball::CBall;
use crate::error::{Error, Result};
use crate::quad::{common_field, parse_ratio, parse_term, split_terms, term_to_quad};
use crate::scalar::Real;
use crate::{ComplexStructure, Lattice, QuadScalar, Rational};

pub use variety::{membership_detail, membership_test, IdentityPolicy, MembershipResult, Monomial, Relation, VarietyDescriptor, Verdict};
pub use weierstrass::{ReducedBasis, SeriesData, POLE_EXCLUSION};

/// Complex number with real and imaginary parts in `Q(sqrt d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactComplex {
    pub re: QuadScalar,
    pub im: QuadScalar,
}

impl ExactComplex {
    pub fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_float(), self.im.to_float())
    }

    pub fn field(&self) -> Result<Option<BigInt>> {
        common_field([&self.re, &self.im])
    }
}

impl FromStr for ExactComplex {
    type Err = Error;

    /// Accepts sums like `1`, `2i`, `-1/2+1/2*sqrt(3)*i`.
    fn from_str(s: &str) -> Result<Self> {
        let terms = split_terms(s);
        if terms.is_empty() {
            return Err(Error::Parse(format!("empty complex literal '{s}'")));
        }
        let (mut re, mut im) = (QuadScalar::zero(), QuadScalar::zero());
        for (neg, t) in terms {
            let term = parse_term::<BigInt>(&t)?;
            let mut q = term_to_quad(&term)?;
            if neg {
                q = -q;
            }
            let target = if term.imaginary { &mut im } else { &mut re };
            if !target.compatible(&q) {
                return Err(Error::Parse(format!("mixed quadratic fields in '{s}'")));
            }
            *target = target.clone() + q;
        }
        let out = ExactComplex { re, im };
        out.field()?;
        Ok(out)
    }
}

fn quad_terms(q: &QuadScalar, suffix: &str) -> Vec<String> {
    let mut out = Vec::new();
    if !q.rational_part().is_zero() {
        out.push(format!("{}{}", q.rational_part(), suffix));
    }
    if let Some(d) = q.field() {
        out.push(format!("{}*sqrt({}){}", q.irrational_part(), d, suffix));
    }
    out
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = quad_terms(&self.re, "");
        terms.extend(quad_terms(&self.im, "*i"));
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut s = String::new();
        for t in terms {
            match t.strip_prefix('-') {
                Some(rest) if !s.is_empty() => {
                    s.push('-');
                    s.push_str(rest);
                }
                _ => {
                    if !s.is_empty() {
                        s.push('+');
                    }
                    s.push_str(&t);
                }
            }
        }
        write!(f, "{s}")
    }
}

impl Serialize for ExactComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for rationals as `"p/q"` strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        parse_ratio::<BigInt>(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Rational short Weierstrass model `y^2 = x^3 + a x + b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveModel {
    #[serde(with = "rational_str")]
    pub a: Rational,
    #[serde(with = "rational_str")]
    pub b: Rational,
}

impl CurveModel {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        let m = CurveModel { a, b };
        if m.discriminant_core().is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(m)
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self> {
        Self::new(Rational::from_integer(a.into()), Rational::from_integer(b.into()))
    }

    /// `4a^3 + 27b^2`.
    pub fn discriminant_core(&self) -> Rational {
        let four = Rational::from_integer(4.into());
        let tw7 = Rational::from_integer(27.into());
        four * self.a.clone() * self.a.clone() * self.a.clone() + tw7 * self.b.clone() * self.b.clone()
    }

    pub fn j_invariant(&self) -> Rational {
        let a3 = self.a.clone() * self.a.clone() * self.a.clone();
        Rational::from_integer(6912.into()) * a3 / self.discriminant_core()
    }
}

/// Configuration of one elliptic factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub omega1: ExactComplex,
    pub omega2: ExactComplex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<CurveModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// `C / (Zω1 + Zω2)` with certified invariants.
#[derive(Clone, Debug)]
pub struct EllipticFactor {
    pub spec: FactorSpec,
    pub label: String,
    pub basis: ReducedBasis,
    pub g2: CBall<f64>,
    pub g3: CBall<f64>,
    series32: SeriesData<f32>,
    series64: SeriesData<f64>,
}

/// Validation points for the differential equation of `℘`.
const VALIDATION_POINTS: [(f64, f64); 4] = [(0.31, 0.17), (0.12, 0.43), (0.47, 0.29), (0.21, -0.38)];

/// Relative residual of `℘'^2 = 4℘^3 - g2 ℘ - g3`, scaled by `1 + |4℘^3| + |g2 ℘| + |g3|`.
pub fn ode_residual(p: &CBall<f64>, dp: &CBall<f64>, g2: &CBall<f64>, g3: &CBall<f64>) -> f64 {
    let lhs = dp.mid * dp.mid;
    let cube = p.mid * p.mid * p.mid * 4.0;
    let rhs = cube - g2.mid * p.mid - g3.mid;
    let scale = 1.0 + cube.norm() + (g2.mid * p.mid).norm() + g3.mid.norm();
    (lhs - rhs).norm() / scale
}

impl EllipticFactor {
    pub fn new(spec: FactorSpec, index: usize) -> Result<Self> {
        let basis = ReducedBasis::new(spec.omega1.to_c64(), spec.omega2.to_c64())?;
        let series32 = SeriesData::new(&basis);
        let series64 = SeriesData::new(&basis);
        let (g2, g3) = weierstrass::invariants(&series64);
        let label = spec.label.clone().unwrap_or_else(|| format!("E{}", index + 1));
        let factor = EllipticFactor { spec, label, basis, g2, g3, series32, series64 };
        for (a, b) in VALIDATION_POINTS {
            let (p, dp) = weierstrass::wp_at_reduced(&factor.series64, a, b)?;
            let res = ode_residual(&p, &dp, &g2, &g3);
            if res > 1e-9 {
                return Err(Error::Validation(format!("℘ validation residual {res:e} on {}", factor.label)));
            }
        }
        if let Some(model) = &factor.spec.model {
            factor.check_model(model)?;
        }
        Ok(factor)
    }

    /// The rational model must share the lattice's j-invariant.
    fn check_model(&self, model: &CurveModel) -> Result<()> {
        let g2c = self.g2.mid.powi(3);
        let disc = g2c - self.g3.mid * self.g3.mid * 27.0;
        let j_lat = g2c * 1728.0 / disc;
        let j_model = model.j_invariant().to_f64().unwrap_or(f64::NAN);
        if (j_lat - j_model).norm() > 1e-6 * (1.0 + j_model.abs()) {
            return Err(Error::Validation(format!(
                "curve model j = {j_model} does not match lattice j = {:.6}{:+.6}i on {}",
                j_lat.re, j_lat.im, self.label
            )));
        }
        Ok(())
    }

    pub fn omega1(&self) -> Complex<f64> {
        self.spec.omega1.to_c64()
    }

    pub fn omega2(&self) -> Complex<f64> {
        self.spec.omega2.to_c64()
    }

    /// Shortest nonzero period length.
    pub fn min_period(&self) -> f64 {
        self.basis.omega1.norm()
    }

    pub(crate) fn series<F: Real>(&self) -> SeriesData<F> {
        // Dispatch on the width of `F`; both precisions are cached.
        if std::mem::size_of::<F>() == 4 {
            let s = &self.series32;
            SeriesData {
                omega1: cast_ball(s.omega1),
                tau: cast_ball(s.tau),
                q: cast_ball(s.q),
                two_pi_i: cast_ball(s.two_pi_i),
                terms: s.terms,
            }
        } else {
            let s = &self.series64;
            SeriesData {
                omega1: cast_ball(s.omega1),
                tau: cast_ball(s.tau),
                q: cast_ball(s.q),
                two_pi_i: cast_ball(s.two_pi_i),
                terms: s.terms,
            }
        }
    }

    /// `(℘, ℘')` at the point with rational coordinates `(r1, r2)` in the
    /// basis `(ω1, ω2)`; `None` at lattice points.
    pub fn wp_rational<F: Real>(&self, r1: &Rational, r2: &Rational) -> Result<Option<(CBall<F>, CBall<F>)>> {
        let (s1, s2) = self.basis.reduced_coords(r1.clone(), r2.clone(), |v| Rational::from_integer(v.into()));
        let c1 = s1.clone() - s1.round();
        let c2 = s2.clone() - s2.round();
        if c1.is_zero() && c2.is_zero() {
            return Ok(None);
        }
        let (a, b) = (c1.to_f64().unwrap_or(f64::NAN), c2.to_f64().unwrap_or(f64::NAN));
        weierstrass::wp_at_reduced(&self.series::<F>(), a, b).map(Some)
    }
}

fn cast_ball<A: Real, B: Real>(x: CBall<A>) -> CBall<B> {
    let m = Complex::new(B::lit(x.mid.re.to_f64().unwrap_or(f64::NAN)), B::lit(x.mid.im.to_f64().unwrap_or(f64::NAN)));
    CBall::new(m, B::lit(x.rad.to_f64().unwrap_or(f64::INFINITY)))
}

/// `(g2, g3)` of the period lattice as certified enclosures.
pub fn lattice_invariants(omega1: Complex<f64>, omega2: Complex<f64>) -> Result<(CBall<f64>, CBall<f64>)> {
    let basis = ReducedBasis::new(omega1, omega2)?;
    Ok(weierstrass::invariants(&SeriesData::<f64>::new(&basis)))
}

/// `(℘(z), ℘'(z))` for the factor's lattice.
pub fn wp_eval(z: Complex<f64>, factor: &EllipticFactor) -> Result<(CBall<f64>, CBall<f64>)> {
    let b = &factor.basis;
    let u = z / b.omega1;
    let s2 = u.im / b.tau.im;
    let s1 = u.re - s2 * b.tau.re;
    let (a, bb) = (weierstrass::center_mod1(s1), weierstrass::center_mod1(s2));
    let (p, dp) = weierstrass::wp_at_reduced(&factor.series::<f64>(), a, bb)?;
    // Cover the rounding of the coordinate solve.
    let eps = f64::EPSILON * 8.0 * (1.0 + u.norm());
    let dz = eps * b.omega1.norm() * (1.0 + b.tau.norm());
    let cubic = 4.0 * p.abs_upper().powi(3) + factor.g2.abs_upper() * p.abs_upper() + factor.g3.abs_upper();
    let dp_bound = cubic.sqrt();
    let ddp_bound = 6.0 * p.abs_upper().powi(2) + factor.g2.abs_upper() / 2.0;
    Ok((p.widen(dp_bound * dz), dp.widen(ddp_bound * dz)))
}

/// Configuration of a product torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    pub factors: Vec<FactorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
}

/// `E_1 × ... × E_g` with its period lattice in `R^{2g}`.
#[derive(Clone, Debug)]
pub struct ProductTorus {
    pub factors: Vec<EllipticFactor>,
    pub lattice: Lattice,
    pub complex: ComplexStructure,
    pub d: Option<i64>,
}

impl ProductTorus {
    pub fn new(spec: &TorusSpec) -> Result<Self> {
        if spec.factors.is_empty() {
            return Err(Error::Validation("torus needs at least one factor".into()));
        }
        let mut field: Option<BigInt> = None;
        for f in &spec.factors {
            for w in [&f.omega1, &f.omega2] {
                if let Some(d) = w.field()? {
                    match &field {
                        Some(e) if *e != d => {
                            return Err(Error::FieldMismatch { left: e.to_string(), right: d.to_string() });
                        }
                        _ => field = Some(d),
                    }
                }
            }
        }
        if let (Some(want), Some(have)) = (spec.d, &field) {
            if BigInt::from(want) != *have {
                return Err(Error::FieldMismatch { left: want.to_string(), right: have.to_string() });
            }
        }
        let factors: Vec<EllipticFactor> =
            spec.factors.iter().cloned().enumerate().map(|(i, f)| EllipticFactor::new(f, i)).collect::<Result<_>>()?;
        let n = 2 * factors.len();
        let mut basis = Vec::with_capacity(n);
        for (k, f) in factors.iter().enumerate() {
            for w in [&f.spec.omega1, &f.spec.omega2] {
                let mut v = vec![QuadScalar::zero(); n];
                v[2 * k] = w.re.clone();
                v[2 * k + 1] = w.im.clone();
                basis.push(v);
            }
        }
        let lattice = Lattice::new(basis)?;
        let complex = ComplexStructure::standard(&lattice)?;
        let d = spec.d.or_else(|| field.and_then(|f| f.to_i64()));
        Ok(ProductTorus { factors, lattice, complex, d })
    }

    pub fn genus(&self) -> usize {
        self.factors.len()
    }

    pub fn spec(&self) -> TorusSpec {
        TorusSpec { factors: self.factors.iter().map(|f| f.spec.clone()).collect(), d: self.d }
    }
}

/// A point `r ∈ Q^{2g} ∩ [0,1)^{2g}` in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalTorusPoint {
    coords: Vec<Rational>,
}

impl RationalTorusPoint {
    /// Reduces every coordinate into `[0, 1)`.
    pub fn new(coords: Vec<Rational>) -> Self {
        let coords = coords.into_iter().map(|x| x.clone() - x.floor()).collect();
        RationalTorusPoint { coords }
    }

    /// The grid point `k / T`.
    pub fn from_grid(k: &[i64], t: u64) -> Self {
        let den = BigInt::from(t);
        Self::new(k.iter().map(|&x| Ratio::new(BigInt::from(x), den.clone())).collect())
    }

    pub fn zero(dim: usize) -> Self {
        RationalTorusPoint { coords: vec![Rational::zero(); dim] }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Least `T >= 1` with `T r ∈ Z^{2g}`: the order of `β(r)`.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// `r + s mod Z^{2g}`.
    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coords.iter().map(|a| -a).collect())
    }

    /// Integer multiple `n r mod Z^{2g}`.
    pub fn scale(&self, n: i64) -> Self {
        let k = Rational::from_integer(n.into());
        Self::new(self.coords.iter().map(|a| a * &k).collect())
    }

    /// Numerators over a common denominator `T`.
    pub fn grid_index(&self, t: u64) -> Option<Vec<i64>> {
        let tt = Rational::from_integer(t.into());
        self.coords
            .iter()
            .map(|x| {
                let v = x * &tt;
                v.is_integer().then(|| v.to_integer().to_i64()).flatten()
            })
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `z_k = r_{2k} ω1 + r_{2k+1} ω2` for every factor.
    pub fn to_complex(&self, torus: &ProductTorus) -> Vec<Complex<f64>> {
        let r = self.to_f64();
        torus.factors.iter().enumerate().map(|(k, f)| f.omega1() * r[2 * k] + f.omega2() * r[2 * k + 1]).collect()
    }
}

impl fmt::Display for RationalTorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for RationalTorusPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalTorusPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<String>::deserialize(d)?;
        let coords = parts.iter().map(|p| parse_ratio::<BigInt>(p)).collect::<Result<Vec<_>>>().map_err(serde::de::Error::custom)?;
        Ok(RationalTorusPoint::new(coords))
    }
}

/// Image of a torus point on one factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorValue<F> {
    Identity,
    Affine { x: CBall<F>, y: CBall<F> },
    /// Inside the pole-exclusion radius but not at a lattice point.
    NearPole,
}

impl<F: Real> FactorValue<F> {
    pub fn is_identity(&self) -> bool {
        matches!(self, FactorValue::Identity)
    }
}

/// Per-factor Weierstrass coordinates `(℘(z_k), ℘'(z_k))` of `β(r)`.
pub fn beta_map_with<F: Real>(r: &RationalTorusPoint, torus: &ProductTorus) -> Result<Vec<FactorValue<F>>> {
    if r.dim() != 2 * torus.genus() {
        return Err(Error::DimensionMismatch { expected: 2 * torus.genus(), found: r.dim() });
    }
    torus
        .factors
        .iter()
        .enumerate()
        .map(|(k, f)| match f.wp_rational::<F>(&r.coords[2 * k], &r.coords[2 * k + 1]) {
            Ok(None) => Ok(FactorValue::Identity),
            Ok(Some((x, y))) => Ok(FactorValue::Affine { x, y }),
            Err(Error::Pole) => Ok(FactorValue::NearPole),
            Err(e) => Err(e),
        })
        .collect()
}

/// `β(r)` in double precision.
pub fn beta_map(r: &RationalTorusPoint, torus: &ProductTorus) -> Result<Vec<FactorValue<f64>>> {
    beta_map_with::<f64>(r, torus)
}

/// Chord-tangent addition on `y^2 = 4x^3 - g2 x - g3` (midpoints only).
pub fn weierstrass_add(p: FactorValue<f64>, q: FactorValue<f64>, g2: Complex<f64>) -> FactorValue<f64> {
    let (FactorValue::Affine { x: x1, y: y1 }, FactorValue::Affine { x: x2, y: y2 }) = (p, q) else {
        return match (p, q) {
            (FactorValue::Identity, other) | (other, FactorValue::Identity) => other,
            _ => FactorValue::NearPole,
        };
    };
    let (x1, y1, x2, y2) = (x1.mid, y1.mid, x2.mid, y2.mid);
    let lambda = if (x1 - x2).norm() > 1e-9 * (1.0 + x1.norm()) {
        (y2 - y1) / (x2 - x1)
    } else {
        if (y1 + y2).norm() < 1e-9 * (1.0 + y1.norm()) {
            return FactorValue::Identity;
        }
        (x1 * x1 * 12.0 - g2) / (y1 * 2.0)
    };
    let x3 = lambda * lambda / 4.0 - x1 - x2;
    let y3 = -(lambda * (x3 - x1) + y1);
    FactorValue::Affine { x: CBall::exact(x3), y: CBall::exact(y3) }
}

/// Euler-style Jordan totient `J_k(T) = T^k Π_{p|T} (1 - p^{-k})`.
pub fn jordan_totient(k: u32, t: u64) -> u64 {
    let mut result = t.pow(k);
    let mut n = t;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            result = result / p.pow(k) * (p.pow(k) - 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        result = result / n.pow(k) * (n.pow(k) - 1);
    }
    result
}

/// Odometer over `{0..T-1}^dim` in lexicographic order.
pub fn grid_indices(t: u64, dim: usize) -> impl Iterator<Item = Vec<i64>> {
    let total = (t as u128).pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut k = vec![0i64; dim];
        for slot in k.iter_mut().rev() {
            *slot = (idx % t as u128) as i64;
            idx /= t as u128;
        }
        k
    })
}

/// All torus points of order dividing `T` (`exact = false`) or exactly `T`.
pub fn torsion_points_of_order(t: u64, torus: &ProductTorus, exact: bool) -> Result<Vec<RationalTorusPoint>> {
    if t == 0 {
        return Err(Error::Validation("torsion order must be at least 1".into()));
    }
    let dim = 2 * torus.genus();
    let tb = BigInt::from(t);
    Ok(grid_indices(t, dim)
        .map(|k| RationalTorusPoint::from_grid(&k, t))
        .filter(|r| !exact || r.denominator() == tb)
        .collect())
}
