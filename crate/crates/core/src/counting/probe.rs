//! Empirical probe of the uniform bound on isolated intersections of
//! algebraic curves of bounded degree with the periodic set inside a ball.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::C64;
use crate::uniformization::{wp_eval, FactorValue, ProductTorus, VarietyDescriptor, Verdict};
use crate::{Error, Result};

/// Fraction of `IN` grid samples above which a curve counts as contained.
pub const CONTAINMENT_FRACTION: f64 = 0.9;

/// Coefficient box of the random curves.
pub const COEFF_BOUND: i64 = 3;

/// Polydisc-style region: `z_1 ∈ center_1 + D(0, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeBall {
    pub center: Vec<C64>,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// Grid points per side of the parameter square.
    pub grid: usize,
    pub tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { grid: 48, tol: 1e-8 }
    }
}

/// One random curve `t ↦ (c_1 + t, c_2 + p_2(t), …, c_g + p_g(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveProbe {
    pub degree: u32,
    pub index: usize,
    /// `coefficients[j][k]`: coefficient of `t^k` in `p_{j+2}`.
    pub coefficients: Vec<Vec<i64>>,
    pub intersections: usize,
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub delta: u32,
    /// Largest intersection count over the curves not contained in the set.
    pub k: usize,
    pub curves: Vec<CurveProbe>,
    /// Indices into `curves` of the curves flagged as contained.
    pub flagged: Vec<usize>,
}

/// Coefficients of sample `s` of exact degree `d`; the stream depends only on
/// `(seed, d, s)`, so the family for `δ' > δ` contains the family for `δ`.
fn draw_curve(seed: u64, d: u32, s: usize, g: usize) -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((d as u64) << 32) | s as u64);
    (1..g)
        .map(|_| {
            let mut c: Vec<i64> = (0..=d).map(|_| rng.gen_range(-COEFF_BOUND..=COEFF_BOUND)).collect();
            while c[d as usize] == 0 {
                c[d as usize] = rng.gen_range(-COEFF_BOUND..=COEFF_BOUND);
            }
            c
        })
        .collect()
}

struct Curve<'a> {
    torus: &'a ProductTorus,
    x: &'a VarietyDescriptor,
    center: &'a [C64],
    coeffs: Vec<Vec<i64>>,
}

impl Curve<'_> {
    fn point(&self, t: C64) -> Vec<C64> {
        let mut z = vec![self.center[0] + t];
        for (j, c) in self.coeffs.iter().enumerate() {
            let p = c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * t + a as f64);
            z.push(self.center[j + 1] + p);
        }
        z
    }

    fn values(&self, t: C64) -> Result<Vec<FactorValue<f64>>> {
        self.point(t)
            .iter()
            .zip(&self.torus.factors)
            .map(|(&z, f)| match wp_eval(z, f) {
                Ok((x, y)) => Ok(FactorValue::Affine { x, y }),
                Err(Error::Pole) => Ok(FactorValue::NearPole),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// First relation along the curve; `None` near poles.
    fn f(&self, t: C64) -> Result<Option<C64>> {
        let vals = self.values(t)?;
        Ok(self.x.relations[0].evaluate(&vals, self.x.policy).filter(|v| v.is_finite()).map(|v| v.mid))
    }

    fn is_in(&self, t: C64, tol: f64) -> Result<bool> {
        Ok(self.x.classify(&self.values(t)?, tol).0 == Verdict::In)
    }

    fn newton(&self, mut t: C64) -> Result<Option<C64>> {
        for _ in 0..60 {
            let h = 1e-6 * (1.0 + t.norm());
            let (Some(v), Some(vp), Some(vm)) = (self.f(t)?, self.f(t + h)?, self.f(t - h)?) else {
                return Ok(None);
            };
            let d = (vp - vm) / (2.0 * h);
            if d.norm() == 0.0 || !d.norm().is_finite() {
                return Ok(None);
            }
            let step = v / d;
            t -= step;
            if step.norm() < 1e-13 * (1.0 + t.norm()) {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }
}

fn probe_curve(curve: &Curve<'_>, radius: f64, opts: &ProbeOptions) -> Result<(usize, bool)> {
    let n = opts.grid.max(4);
    let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
    let mut grid: Vec<Option<f64>> = vec![None; n * n];
    let mut inside = 0usize;
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            let t = Complex::new(coord(i), coord(j));
            if t.norm() > radius {
                continue;
            }
            inside += 1;
            if curve.is_in(t, opts.tol)? {
                hits += 1;
            }
            grid[i * n + j] = curve.f(t)?.map(|v| v.norm());
        }
    }
    if inside > 0 && hits as f64 > CONTAINMENT_FRACTION * inside as f64 {
        return Ok((0, true));
    }
    let mut zeros: Vec<C64> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let Some(v) = grid[i * n + j] else { continue };
            let is_min = (-1i64..=1).all(|di| {
                (-1i64..=1).all(|dj| {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n as i64 || b >= n as i64 {
                        return true;
                    }
                    grid[a as usize * n + b as usize].map_or(true, |w| v <= w)
                })
            });
            if !is_min {
                continue;
            }
            let Some(z) = curve.newton(Complex::new(coord(i), coord(j)))? else { continue };
            if z.norm() <= radius && curve.is_in(z, opts.tol)? && zeros.iter().all(|w| (w - z).norm() > 1e-7) {
                zeros.push(z);
            }
        }
    }
    Ok((zeros.len(), false))
}

/// Samples `n_samples` curves of each degree `1..=delta` through the ball
/// and records, per curve, the number of isolated `IN` points of the first
/// relation inside the ball.
pub fn uniform_intersection_bound_probe(
    x: &VarietyDescriptor,
    torus: &ProductTorus,
    ball: &ProbeBall,
    delta: u32,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeResult> {
    uniform_intersection_bound_probe_with(x, torus, ball, delta, n_samples, seed, &ProbeOptions::default())
}

pub fn uniform_intersection_bound_probe_with(
    x: &VarietyDescriptor,
    torus: &ProductTorus,
    ball: &ProbeBall,
    delta: u32,
    n_samples: usize,
    seed: u64,
    opts: &ProbeOptions,
) -> Result<ProbeResult> {
    let g = torus.genus();
    if x.g != g || ball.center.len() != g {
        return Err(Error::DimensionMismatch { expected: g, found: if x.g != g { x.g } else { ball.center.len() } });
    }
    if x.relations.is_empty() {
        return Err(Error::Validation("the probe needs at least one relation".into()));
    }
    if !(ball.radius > 0.0) || delta == 0 {
        return Err(Error::Validation("probe needs a positive radius and degree".into()));
    }
    let jobs: Vec<(u32, usize)> = (1..=delta).flat_map(|d| (0..n_samples).map(move |s| (d, s))).collect();
    let curves: Vec<CurveProbe> = jobs
        .par_iter()
        .map(|&(d, s)| {
            let coeffs = draw_curve(seed, d, s, g);
            let curve = Curve { torus, x, center: &ball.center, coeffs: coeffs.clone() };
            let (intersections, contained) = probe_curve(&curve, ball.radius, opts)?;
            Ok(CurveProbe { degree: d, index: s, coefficients: coeffs, intersections, contained })
        })
        .collect::<Result<_>>()?;
    let flagged: Vec<usize> = curves.iter().enumerate().filter(|(_, c)| c.contained).map(|(i, _)| i).collect();
    let k = curves.iter().filter(|c| !c.contained).map(|c| c.intersections).max().unwrap_or(0);
    Ok(ProbeResult { delta, k, curves, flagged })
}
