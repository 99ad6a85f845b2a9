//! Dense exact linear algebra over an [`ExactField`].
//!
//! Vectors are plain `Vec<K>`; matrices are row-major `Vec<Vec<K>>`.

use crate::error::{Error, Result};
use crate::scalar::ExactField;

pub type Matrix<K> = Vec<Vec<K>>;

pub fn identity<K: ExactField>(n: usize) -> Matrix<K> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { K::one() } else { K::zero() }).collect())
        .collect()
}

pub fn transpose<K: ExactField>(m: &Matrix<K>, cols: usize) -> Matrix<K> {
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul<K: ExactField>(a: &Matrix<K>, b: &Matrix<K>) -> Matrix<K> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(K::zero(), |acc, k| acc + row[k].clone() * b[k][j].clone())
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<K: ExactField>(a: &Matrix<K>, v: &[K]) -> Vec<K> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(K::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
        .collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// Pivots are taken in column order, each from the first row (by index) with a
/// nonzero entry, so the output is a deterministic function of the row space.
pub fn rref_in_place<K: ExactField>(m: &mut Matrix<K>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = K::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = m[r][j].clone();
                    m[i][j] = m[i][j].clone() - f.clone() * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

/// Nonzero rows of the reduced row echelon form of `rows`.
pub fn row_basis<K: ExactField>(rows: &[Vec<K>], cols: usize) -> Matrix<K> {
    let mut m: Matrix<K> = rows.to_vec();
    rref_in_place(&mut m, cols);
    m
}

pub fn rank<K: ExactField>(rows: &[Vec<K>], cols: usize) -> usize {
    row_basis(rows, cols).len()
}

/// Basis of `{x : M x = 0}` from an RREF, one vector per free column.
pub fn nullspace<K: ExactField>(rows: &[Vec<K>], cols: usize) -> Matrix<K> {
    let mut m = rows.to_vec();
    let pivots = rref_in_place(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![K::zero(); cols];
            v[f] = K::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Exact inverse of a square matrix.
pub fn inverse<K: ExactField>(a: &Matrix<K>) -> Result<Matrix<K>> {
    let n = a.len();
    let mut aug: Matrix<K> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { K::one() } else { K::zero() }));
            r
        })
        .collect();
    let pivots = rref_in_place(&mut aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::DegenerateLattice(format!("matrix of size {n} is singular")));
    }
    Ok(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Coordinates of `v` with respect to RREF `rows` (with their `pivots`), or
/// `None` when `v` is outside the row space.
pub fn coordinates_in_rref<K: ExactField>(rows: &[Vec<K>], pivots: &[usize], v: &[K]) -> Option<Vec<K>> {
    let coords: Vec<K> = pivots.iter().map(|&p| v[p].clone()).collect();
    let mut recon = vec![K::zero(); v.len()];
    for (c, row) in coords.iter().zip(rows) {
        for (x, y) in recon.iter_mut().zip(row) {
            *x = x.clone() + c.clone() * y.clone();
        }
    }
    (recon == v).then_some(coords)
}
