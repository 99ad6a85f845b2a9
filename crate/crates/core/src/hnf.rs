//! Column-style Hermite normal form over an integer ring, with the
//! unimodular transform. Used for lattice saturation and integral
//! membership tests.

use num_rational::Ratio;

use crate::scalar::IntegerRing;

/// `M * U = H` with `U` unimodular and `H` in column echelon form.
#[derive(Clone, Debug)]
pub struct ColumnHnf<I> {
    pub h: Vec<Vec<I>>,
    pub u: Vec<Vec<I>>,
    /// `(row, column)` of every pivot, columns `0..rank`.
    pub pivots: Vec<(usize, usize)>,
}

impl<I: IntegerRing> ColumnHnf<I> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of the integer kernel `{x in Z^n : M x = 0}` (saturated).
    pub fn kernel(&self) -> Vec<Vec<I>> {
        let n = self.u.len();
        (self.rank()..n).map(|j| self.u.iter().map(|row| row[j].clone()).collect()).collect()
    }

    /// Nonzero columns of `H`, i.e. a basis of the column lattice `M Z^n`.
    pub fn image_basis(&self) -> Vec<Vec<I>> {
        (0..self.rank()).map(|j| self.h.iter().map(|row| row[j].clone()).collect()).collect()
    }

    /// Integer solution `x` of `H x = v` restricted to the pivot columns, if any.
    /// `v` lies in the column lattice of `M` exactly when this succeeds.
    pub fn solve_integral(&self, v: &[Ratio<I>]) -> Option<Vec<I>> {
        let mut x: Vec<I> = Vec::with_capacity(self.rank());
        for (j, &(row, col)) in self.pivots.iter().enumerate() {
            debug_assert_eq!(col, j);
            let mut rhs = v[row].clone();
            for (i, xi) in x.iter().enumerate() {
                rhs = rhs - Ratio::from_integer(self.h[row][i].clone() * xi.clone());
            }
            let q = rhs / Ratio::from_integer(self.h[row][col].clone());
            if !q.is_integer() {
                return None;
            }
            x.push(q.to_integer());
        }
        for (row, target) in self.h.iter().zip(v) {
            let s = row.iter().zip(&x).fold(I::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
            if Ratio::from_integer(s) != *target {
                return None;
            }
        }
        Some(x)
    }
}

fn col_combine<I: IntegerRing>(m: &mut [Vec<I>], c1: usize, c2: usize, s: &I, t: &I, u: &I, v: &I) {
    // (col c1, col c2) <- (s*c1 + t*c2, u*c1 + v*c2)
    for row in m.iter_mut() {
        let a = row[c1].clone();
        let b = row[c2].clone();
        row[c1] = s.clone() * a.clone() + t.clone() * b.clone();
        row[c2] = u.clone() * a + v.clone() * b;
    }
}

/// Column Hermite normal form of an `rows x cols` integer matrix.
///
/// Pivots are chosen row by row with the leftmost free column, so the result
/// is deterministic; pivots are positive and entries left of a pivot are
/// reduced into `[0, pivot)`.
pub fn column_hnf<I: IntegerRing>(m: &[Vec<I>], cols: usize) -> ColumnHnf<I> {
    let mut h: Vec<Vec<I>> = m.to_vec();
    let mut u: Vec<Vec<I>> = (0..cols)
        .map(|i| (0..cols).map(|j| if i == j { I::one() } else { I::zero() }).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut col = 0;
    for row in 0..h.len() {
        if col == cols {
            break;
        }
        for j in col + 1..cols {
            if h[row][j].is_zero() {
                continue;
            }
            let a = h[row][col].clone();
            let b = h[row][j].clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let a_g = a / g.clone();
            let b_g = b / g;
            let nb = -b_g;
            col_combine(&mut h, col, j, &s, &t, &nb, &a_g);
            col_combine(&mut u, col, j, &s, &t, &nb, &a_g);
        }
        if h[row][col].is_zero() {
            continue;
        }
        if h[row][col].is_negative() {
            for mat in [&mut h, &mut u] {
                for r in mat.iter_mut() {
                    r[col] = -r[col].clone();
                }
            }
        }
        let p = h[row][col].clone();
        for k in 0..col {
            let q = h[row][k].div_floor(&p);
            if q.is_zero() {
                continue;
            }
            for mat in [&mut h, &mut u] {
                for r in mat.iter_mut() {
                    r[k] = r[k].clone() - q.clone() * r[col].clone();
                }
            }
        }
        pivots.push((row, col));
        col += 1;
    }
    ColumnHnf { h, u, pivots }
}

/// Canonical (Hermite) basis of the row lattice spanned by `rows`.
pub fn hnf_row_basis<I: IntegerRing>(rows: &[Vec<I>], n: usize) -> Vec<Vec<I>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let t: Vec<Vec<I>> = (0..n).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    column_hnf(&t, rows.len()).image_basis()
}

/// Clears denominators of a rational vector and divides out the content.
pub fn primitive_integer_vector<I: IntegerRing>(v: &[Ratio<I>]) -> Vec<I> {
    let lcm = v.iter().fold(I::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<I> = v.iter().map(|x| (x.clone() * Ratio::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(I::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return ints;
    }
    ints.into_iter().map(|x| x / g.clone()).collect()
}
