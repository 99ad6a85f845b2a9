//! Dense complex numerics in double precision: polynomial roots with
//! inclusion radii, determinants, and a one-sided Jacobi SVD.

use num_complex::Complex;

use crate::ball::CBall;

pub type C64 = Complex<f64>;

/// Horner evaluation of `Σ c_k z^k` (ascending coefficients) with its derivative
/// and a running rounding-error bound for the value.
pub fn horner(coeffs: &[C64], z: C64) -> (C64, C64, f64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    let mut err = 0.0;
    let az = z.norm();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        err = err * az + p.norm();
    }
    (p, dp, err * 4.0 * f64::EPSILON)
}

/// A root enclosure: the disc of radius `rad` about `mid` contains a root.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootCluster {
    pub center: CBall<f64>,
    pub multiplicity: usize,
}

fn strip_leading(coeffs: &[CBall<f64>]) -> &[CBall<f64>] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].contains_zero() {
        n -= 1;
    }
    &coeffs[..n]
}

/// All roots of `Σ c_k z^k` by Aberth iteration, each with a certified
/// inclusion radius `n (|p(z)| + err + Σ rad_k |z|^k) / |p'(z)|`.
pub fn poly_roots(coeffs: &[CBall<f64>]) -> Vec<CBall<f64>> {
    let coeffs = strip_leading(coeffs);
    if coeffs.len() < 2 {
        return Vec::new();
    }
    let n = coeffs.len() - 1;
    let mids: Vec<C64> = coeffs.iter().map(|c| c.mid).collect();
    let lead = mids[n].norm();
    // Cauchy bound on the root moduli.
    let bound = 1.0 + mids[..n].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(bound * 0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp, _) = horner(&mids, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-17 {
            break;
        }
    }
    let rads: Vec<f64> = coeffs.iter().map(|c| c.rad).collect();
    z.into_iter()
        .map(|zi| {
            let (p, dp, err) = horner(&mids, zi);
            let az = zi.norm();
            let coeff_err: f64 = rads.iter().enumerate().map(|(k, r)| r * az.powi(k as i32)).sum();
            let denom = dp.norm() - err;
            let rad = if denom > 0.0 { n as f64 * (p.norm() + err + coeff_err) / denom } else { f64::INFINITY };
            CBall::new(zi, rad.max(f64::EPSILON * (1.0 + az)))
        })
        .collect()
}

/// Groups root enclosures whose discs overlap into clusters, ordered by
/// modulus, then real part, then imaginary part of the center.
pub fn cluster_roots(roots: &[CBall<f64>]) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if roots[i].overlaps(&roots[j]) || !roots[i].rad.is_finite() || !roots[j].rad.is_finite() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut key: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match key.iter().position(|&k| k == r) {
            Some(pos) => groups[pos].push(i),
            None => {
                key.push(r);
                groups.push(vec![i]);
            }
        }
    }
    let mut out: Vec<RootCluster> = groups
        .into_iter()
        .map(|g| {
            let m = g.len();
            let center: C64 = g.iter().map(|&i| roots[i].mid).sum::<C64>() / m as f64;
            let rad = g.iter().map(|&i| (roots[i].mid - center).norm() + roots[i].rad).fold(0.0, f64::max);
            RootCluster { center: CBall::new(center, rad), multiplicity: m }
        })
        .collect();
    out.sort_by(|a, b| cmp_c64(a.center.mid, b.center.mid));
    out
}

/// Deterministic order on complex numbers: modulus, then real, then imaginary
/// part, each compared up to a relative `1e-9`.
pub fn cmp_c64(a: C64, b: C64) -> std::cmp::Ordering {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
    let (na, nb) = (a.norm(), b.norm());
    if !close(na, nb) {
        return na.total_cmp(&nb);
    }
    if !close(a.re, b.re) {
        return a.re.total_cmp(&b.re);
    }
    if !close(a.im, b.im) {
        return a.im.total_cmp(&b.im);
    }
    std::cmp::Ordering::Equal
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut m: Vec<Vec<C64>>) -> C64 {
    let n = m.len();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm())).unwrap();
        if m[piv][col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let t = m[col][c];
                m[r][c] -= f * t;
            }
        }
    }
    det
}

/// Sylvester resultant of two univariate polynomials (ascending coefficients).
pub fn resultant(p: &[C64], q: &[C64]) -> C64 {
    let (n, m) = (p.len().saturating_sub(1), q.len().saturating_sub(1));
    let size = n + m;
    if size == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut s = vec![vec![C64::new(0.0, 0.0); size]; size];
    for r in 0..m {
        for (k, c) in p.iter().rev().enumerate() {
            s[r][r + k] = *c;
        }
    }
    for r in 0..n {
        for (k, c) in q.iter().rev().enumerate() {
            s[m + r][r + k] = *c;
        }
    }
    determinant(s)
}

/// Coefficients of the polynomial of degree `< n` with the given values at
/// the `n`-th roots of unity scaled by `rho` (inverse DFT).
pub fn interpolate_on_circle(values: &[C64], rho: f64) -> Vec<C64> {
    let n = values.len();
    (0..n)
        .map(|l| {
            let s: C64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * l) as f64 / n as f64))
                .sum();
            s / (n as f64 * rho.powi(l as i32))
        })
        .collect()
}

/// Thin SVD result for an `m × n` matrix with `m >= n`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Singular values in decreasing order.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns, matching `sigma`.
    pub v: Vec<Vec<C64>>,
}

/// One-sided (Hestenes) Jacobi SVD of a complex matrix given by rows.
pub fn jacobi_svd(rows: &[Vec<C64>], n: usize) -> Svd {
    let m = rows.len();
    // Column-major working copy.
    let mut a: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| rows[i][j]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n).map(|j| (0..n).map(|i| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma: C64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut a, &mut v] {
                    let len = cols[p].len();
                    for i in 0..len {
                        let xp = cols[p][i];
                        let xq = cols[q][i] * phase.conj();
                        cols[p][i] = xp * c - xq * s;
                        cols[q][i] = xp * s + xq * c;
                    }
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (a[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    Svd { sigma: order.iter().map(|(s, _)| *s).collect(), v: order.iter().map(|&(_, j)| v[j].clone()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CBall<f64> {
        CBall::exact(C64::new(re, im))
    }

    #[test]
    fn roots_of_cubic_enclose_exact_values() {
        // (z - 1)(z + 2)(z - i) = z^3 + (1 - i) z^2 + (-2 - i) z + 2i
        let coeffs = [c(0.0, 2.0), c(-2.0, -1.0), c(1.0, -1.0), c(1.0, 0.0)];
        let roots = poly_roots(&coeffs);
        for exact in [C64::new(1.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.0, 1.0)] {
            assert!(roots.iter().any(|r| r.contains(exact) && r.rad < 1e-12), "{exact}");
        }
        let clusters = cluster_roots(&roots);
        assert_eq!(clusters.len(), 3);
        assert!(clusters[0].center.mid.norm() <= clusters[2].center.mid.norm());
    }

    #[test]
    fn double_root_forms_cluster() {
        // (z - 1)^2 (z + 1)
        let coeffs = [c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)];
        let clusters = cluster_roots(&poly_roots(&coeffs));
        assert_eq!(clusters.len(), 2);
        let double = clusters.iter().find(|k| k.multiplicity == 2).unwrap();
        assert!((double.center.mid - C64::new(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn resultant_matches_product_formula() {
        // Res(z^2 - 1, z - 3) = (1 - 3)(-1 - 3) up to sign conventions: 8.
        let p = [C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let q = [C64::new(-3.0, 0.0), C64::new(1.0, 0.0)];
        assert!((resultant(&p, &q).norm() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn circle_interpolation_recovers_coefficients() {
        let coeffs = [C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.25, 0.0)];
        let rho = 2.0;
        let vals: Vec<C64> = (0..4)
            .map(|k| horner(&coeffs, C64::from_polar(rho, 2.0 * std::f64::consts::PI * k as f64 / 4.0)).0)
            .collect();
        let back = interpolate_on_circle(&vals, rho);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(back[3].norm() < 1e-12);
    }

    #[test]
    fn svd_finds_null_vector() {
        // Rows orthogonal to (1, -2, 1).
        let rows: Vec<Vec<C64>> = [[1.0, 1.0, 1.0], [2.0, 1.0, 0.0], [0.0, 1.0, 2.0], [3.0, 2.0, 1.0]]
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.5 * x)).collect())
            .collect();
        let svd = jacobi_svd(&rows, 3);
        assert!(svd.sigma[2] < 1e-12 * svd.sigma[0]);
        let null = &svd.v[2];
        let ratio = null[1] / null[0];
        assert!((ratio - C64::new(-2.0, 0.0)).norm() < 1e-10);
    }
}
