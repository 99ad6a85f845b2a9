//! Weierstrass `℘`, `℘'`, `g2`, `g3` for a lattice `Zω1 + Zω2` in ball arithmetic.
//!
//! The basis is first Gauss-reduced so that `τ = ω2/ω1` lies in the standard
//! fundamental domain, giving `|q| = |e^{2πiτ}| <= e^{-π√3}`. The functions are
//! then summed as q-expansions (the Fourier form of the Eisenstein sums),
//! truncated with explicit geometric tail bounds:
//!
//! ```text
//! ℘(z)  = (2πi/ω1)^2 [1/12 - 2 Σ_{n>=1} q^n/(1-q^n)^2 + Σ_{n∈Z} q^n x/(1-q^n x)^2]
//! ℘'(z) = (2πi/ω1)^3 Σ_{n∈Z} q^n x (1+q^n x)/(1-q^n x)^3
//! g2    = (2π/ω1)^4 E4 / 12,    g3 = (2π/ω1)^6 E6 / 216
//! ```
//!
//! with `x = e^{2πi u}`, `u = z/ω1` reduced modulo `Z + Zτ`.

use num_complex::Complex;

use crate::ball::CBall;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Points closer than this fraction of the shortest period to a lattice
/// point are treated as poles.
pub const POLE_EXCLUSION: f64 = 1e-4;

/// A Gauss-reduced basis of a period lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBasis {
    /// Shortest period.
    pub omega1: Complex<f64>,
    /// `ω2'/ω1'` in the fundamental domain.
    pub tau: Complex<f64>,
    /// `(ω1', ω2') = M (ω1, ω2)` with `M` in `SL2(Z)`.
    pub to_reduced: [[i64; 2]; 2],
}

impl ReducedBasis {
    pub fn new(omega1: Complex<f64>, omega2: Complex<f64>) -> Result<Self> {
        let tau = omega2 / omega1;
        if !(tau.im > 0.0) || !tau.im.is_finite() {
            return Err(Error::DegenerateLattice(format!("Im(ω2/ω1) = {} is not positive", tau.im)));
        }
        let mut m = [[1i64, 0], [0, 1]];
        let mut t = tau;
        for _ in 0..200 {
            let n = t.re.round();
            if n != 0.0 {
                t.re -= n;
                let n = n as i64;
                m[1][0] -= n * m[0][0];
                m[1][1] -= n * m[0][1];
            }
            if t.norm_sqr() < 1.0 - 1e-14 {
                t = -t.inv();
                m = [m[1], [-m[0][0], -m[0][1]]];
            } else {
                break;
            }
        }
        let w1 = omega1 * m[0][0] as f64 + omega2 * m[0][1] as f64;
        let w2 = omega1 * m[1][0] as f64 + omega2 * m[1][1] as f64;
        Ok(ReducedBasis { omega1: w1, tau: w2 / w1, to_reduced: m })
    }

    /// Coordinates of a point with respect to the reduced basis, given its
    /// coordinates `(r1, r2)` with respect to the original `(ω1, ω2)`.
    pub fn reduced_coords<T>(&self, r1: T, r2: T, int: impl Fn(i64) -> T) -> (T, T)
    where
        T: Clone + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
    {
        // (r1, r2) · (ω1, ω2)^T = (r1, r2) M^{-1} (ω1', ω2')^T and
        // M^{-1} = [[d, -b], [-c, a]] for M = [[a, b], [c, d]].
        let [[a, b], [c, d]] = self.to_reduced;
        let s1 = r1.clone() * int(d) - r2.clone() * int(c);
        let s2 = r2 * int(a) - r1 * int(b);
        (s1, s2)
    }

    pub fn q(&self) -> Complex<f64> {
        (Complex::new(0.0, 2.0 * std::f64::consts::PI) * self.tau).exp()
    }
}

/// Ball versions of the reduced basis data in working precision `F`.
#[derive(Clone, Copy, Debug)]
pub struct SeriesData<F> {
    pub omega1: CBall<F>,
    pub tau: CBall<F>,
    pub q: CBall<F>,
    pub two_pi_i: CBall<F>,
    /// Number of explicit terms; the remainder is covered by the tail bound.
    pub terms: usize,
}

impl<F: Real> SeriesData<F> {
    pub fn new(basis: &ReducedBasis) -> Self {
        let two_pi_i = CBall::from_c64(Complex::new(0.0, 2.0 * std::f64::consts::PI));
        let omega1 = CBall::from_c64(basis.omega1).widen(F::ulp_pad() * F::lit(basis.omega1.norm()));
        let tau = CBall::from_c64(basis.tau).widen(F::ulp_pad() * F::lit(basis.tau.norm()));
        let q = (two_pi_i * tau).exp();
        let qa = q.abs_upper().to_f64().unwrap_or(1.0);
        let target = F::epsilon().to_f64().unwrap_or(1e-16) * 1e-3;
        let terms = ((target.ln() / qa.ln()) - 0.5).ceil().clamp(2.0, 400.0) as usize;
        SeriesData { omega1, tau, q, two_pi_i, terms }
    }
}

/// Upper bound for `Σ_{n>=n0} n^k r^n`, or infinity when the ratio test fails.
pub fn power_tail(k: i32, r: f64, n0: usize) -> f64 {
    let n0f = n0 as f64;
    let rho = ((n0f + 1.0) / n0f).powi(k) * r;
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    n0f.powi(k) * r.powi(n0 as i32) / (1.0 - rho)
}

fn sigma(k: u32, n: usize) -> f64 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as f64).powi(k as i32)).sum()
}

/// `(g2, g3)` from the Eisenstein q-expansions with tail bounds.
pub fn invariants<F: Real>(data: &SeriesData<F>) -> (CBall<F>, CBall<F>) {
    let q = data.q;
    let qa = q.abs_upper().to_f64().unwrap_or(1.0);
    let n = data.terms.max(4);
    let mut e4 = CBall::zero();
    let mut e6 = CBall::zero();
    let mut qn = CBall::one();
    for k in 1..=n {
        qn = qn * q;
        e4 = e4 + qn.scale(F::lit(sigma(3, k)));
        e6 = e6 + qn.scale(F::lit(sigma(5, k)));
    }
    // σ3(n) <= ζ(3) n^3 and σ5(n) <= ζ(5) n^5.
    let t4 = F::lit(240.0 * 1.21 * power_tail(3, qa, n + 1));
    let t6 = F::lit(504.0 * 1.04 * power_tail(5, qa, n + 1));
    let e4 = (CBall::one() + e4.scale(F::lit(240.0))).widen(t4);
    let e6 = (CBall::one() - e6.scale(F::lit(504.0))).widen(t6);
    let c = data.two_pi_i / data.omega1;
    let c2 = c * c;
    let c4 = c2 * c2;
    let g2 = (c4 * e4).scale(F::lit(1.0 / 12.0));
    let g3 = -(c4 * c2 * e6).scale(F::lit(1.0 / 216.0));
    (g2, g3)
}

/// `(℘, ℘')` at `z = u ω1'` for `u = a + bτ` with `a, b ∈ [-1/2, 1/2]`.
pub fn wp_at_reduced<F: Real>(data: &SeriesData<F>, a: f64, b: f64) -> Result<(CBall<F>, CBall<F>)> {
    let tau_mid = Complex::new(data.tau.mid.re.to_f64().unwrap_or(0.0), data.tau.mid.im.to_f64().unwrap_or(0.0));
    if (Complex::new(a, 0.0) + tau_mid * b).norm() < POLE_EXCLUSION {
        return Err(Error::Pole);
    }
    let u = CBall::from_c64(Complex::new(a, 0.0)) + CBall::from_c64(Complex::new(b, 0.0)) * data.tau;
    let x = (data.two_pi_i * u).exp();
    let xi = x.recip();
    let q = data.q;
    let qa = q.abs_upper().to_f64().unwrap_or(1.0);
    let xmax = x.abs_upper().max(xi.abs_upper()).to_f64().unwrap_or(f64::INFINITY);

    let one = CBall::one();
    let p_term = |t: CBall<F>| t / ((one - t) * (one - t));
    let d_term = |t: CBall<F>| {
        let w = one - t;
        t * (one + t) / (w * w * w)
    };

    let mut s1 = CBall::zero();
    let mut wp = p_term(x);
    let mut wpp = d_term(x);
    let mut qn = CBall::one();
    for _ in 1..=data.terms {
        qn = qn * q;
        s1 = s1 + p_term(qn);
        let t = qn * x;
        let s = qn * xi;
        wp = wp + p_term(t) + p_term(s);
        wpp = wpp + d_term(t) - d_term(s);
    }
    let n = data.terms as i32;
    let r0 = qa.powi(n + 1) * xmax;
    if r0 >= 0.5 {
        return Err(Error::Validation("series truncation too short for this point".into()));
    }
    let geo = r0 / (1.0 - qa);
    let tail_wp = 2.0 * geo / (1.0 - r0).powi(2);
    let tail_wpp = 2.0 * geo * (1.0 + r0) / (1.0 - r0).powi(3);
    let qn1 = qa.powi(n + 1);
    let tail_s1 = qn1 / (1.0 - qa) / (1.0 - qn1).powi(2);

    let inner = (CBall::real(F::lit(1.0 / 12.0)) - s1.scale(F::lit(2.0)) + wp).widen(F::lit(tail_wp + 2.0 * tail_s1));
    let c = data.two_pi_i / data.omega1;
    let c2 = c * c;
    let p = c2 * inner;
    let dp = c2 * c * wpp.widen(F::lit(tail_wpp));
    Ok((p, dp))
}

/// Reduces a real coordinate to `[-1/2, 1/2]`.
pub fn center_mod1(x: f64) -> f64 {
    x - x.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct lattice sum oracle with a square cutoff.
    fn lattice_sum_wp(z: Complex<f64>, w1: Complex<f64>, w2: Complex<f64>, n: i64) -> Complex<f64> {
        let mut s = z.inv().powi(2);
        for i in -n..=n {
            for j in -n..=n {
                if i == 0 && j == 0 {
                    continue;
                }
                let w = w1 * i as f64 + w2 * j as f64;
                s += (z - w).inv().powi(2) - w.inv().powi(2);
            }
        }
        s
    }

    fn eisenstein_sum(w1: Complex<f64>, w2: Complex<f64>, k: i32, n: i64) -> Complex<f64> {
        let mut s = Complex::new(0.0, 0.0);
        for i in -n..=n {
            for j in -n..=n {
                if i == 0 && j == 0 {
                    continue;
                }
                s += (w1 * i as f64 + w2 * j as f64).powi(-k);
            }
        }
        s
    }

    #[test]
    fn invariants_match_lattice_sums() {
        for (w1, w2) in [
            (Complex::new(1.0, 0.0), Complex::new(0.0, 2.0)),
            (Complex::new(1.0, 0.0), Complex::new(0.3, 1.1)),
            (Complex::new(0.7, 0.2), Complex::new(-0.4, 1.9)),
        ] {
            let basis = ReducedBasis::new(w1, w2).unwrap();
            let (g2, g3) = invariants::<f64>(&SeriesData::new(&basis));
            let g2_sum = eisenstein_sum(w1, w2, 4, 300) * 60.0;
            let g3_sum = eisenstein_sum(w1, w2, 6, 100) * 140.0;
            // The truncated sums converge like 1/N^2; compare loosely.
            assert!((g2.mid - g2_sum).norm() < 1e-3 * (1.0 + g2_sum.norm()), "{g2} vs {g2_sum}");
            assert!((g3.mid - g3_sum).norm() < 1e-5 * (1.0 + g3_sum.norm()), "{g3} vs {g3_sum}");
            assert!(g2.rad < 1e-10 && g3.rad < 1e-10);
        }
    }

    #[test]
    fn square_lattice_g2_known_value() {
        // g2(Z[i]) = Γ(1/4)^8 / (16 π^2) ≈ 189.0727201292...
        let basis = ReducedBasis::new(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)).unwrap();
        let (g2, g3) = invariants::<f64>(&SeriesData::new(&basis));
        let gamma_quarter: f64 = 3.625_609_908_221_908;
        let expected = gamma_quarter.powi(8) / (16.0 * std::f64::consts::PI.powi(2));
        assert!(g2.contains(Complex::new(expected, 0.0)) || (g2.mid.re - expected).abs() < 1e-9);
        assert!(g3.contains_zero());
    }

    #[test]
    fn wp_matches_lattice_sum() {
        let w1 = Complex::new(1.0, 0.0);
        let w2 = Complex::new(0.2, 1.3);
        let basis = ReducedBasis::new(w1, w2).unwrap();
        let data = SeriesData::<f64>::new(&basis);
        for (r1, r2) in [(0.3, 0.1), (0.25, 0.4), (0.1, -0.35)] {
            let z = w1 * r1 + w2 * r2;
            let (s1, s2) = basis.reduced_coords(r1, r2, |v| v as f64);
            let (p, _) = wp_at_reduced(&data, center_mod1(s1), center_mod1(s2)).unwrap();
            let oracle = lattice_sum_wp(z, w1, w2, 400);
            assert!((p.mid - oracle).norm() < 1e-4, "{p} vs {oracle}");
        }
    }

    #[test]
    fn laurent_oracle_near_origin() {
        // ℘(z) = z^-2 + c2 z^2 + c3 z^4 + ..., c2 = g2/20, c3 = g3/28,
        // c_k = 3/((2k+1)(k-3)) Σ_{m=2}^{k-2} c_m c_{k-m}.
        let basis = ReducedBasis::new(Complex::new(1.0, 0.0), Complex::new(0.4, 0.9)).unwrap();
        let data = SeriesData::<f64>::new(&basis);
        let (g2, g3) = invariants(&data);
        let mut c = vec![Complex::new(0.0, 0.0); 16];
        c[2] = g2.mid / 20.0;
        c[3] = g3.mid / 28.0;
        for k in 4..16 {
            let s: Complex<f64> = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
            c[k] = s * (3.0 / (((2 * k + 1) * (k - 3)) as f64));
        }
        let z = Complex::new(0.05, 0.03);
        let laurent: Complex<f64> = z.inv().powi(2) + (2..16).map(|k| c[k] * z.powi(2 * k as i32 - 2)).sum::<Complex<f64>>();
        let (s1, s2) = basis.reduced_coords(z.re - z.im * 0.4 / 0.9, z.im / 0.9, |v| v as f64);
        let (p, _) = wp_at_reduced(&data, center_mod1(s1), center_mod1(s2)).unwrap();
        assert!((p.mid - laurent).norm() < 1e-9 * laurent.norm(), "{p} vs {laurent}");
    }

    #[test]
    fn reduction_is_unimodular_and_in_domain() {
        let basis = ReducedBasis::new(Complex::new(1.0, 0.0), Complex::new(7.3, 0.05)).unwrap();
        let [[a, b], [c, d]] = basis.to_reduced;
        assert_eq!(a * d - b * c, 1);
        assert!(basis.tau.re.abs() <= 0.5 + 1e-12 && basis.tau.norm() >= 1.0 - 1e-12);
    }
}
