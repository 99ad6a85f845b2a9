#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex;
use num_traits::ToPrimitive;
use torsion_lab::counting::primitive_division_polynomial;
use torsion_lab::numeric::{poly_roots, C64};
use torsion_lab::pipeline::ScenarioConfig;
use torsion_lab::uniformization::{CurveModel, ProductTorus, TorusSpec};
use torsion_lab::Ball64;

pub fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    ScenarioConfig::load(&path).expect("scenario loads")
}

/// Product torus from `(omega1, omega2)` literals, without curve models.
pub fn torus(periods: &[(&str, &str)]) -> ProductTorus {
    let factors: Vec<_> = periods.iter().map(|(a, b)| serde_json::json!({ "omega1": a, "omega2": b })).collect();
    let spec: TorusSpec = serde_json::from_value(serde_json::json!({ "factors": factors })).expect("torus spec");
    ProductTorus::new(&spec).expect("torus")
}

/// `lc · Π (x - r)` in ascending order.
fn scaled_product(lc: f64, roots: &[C64]) -> Vec<C64> {
    let mut p = vec![Complex::new(lc, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        p = next;
    }
    p
}

fn near_integer(c: C64) -> bool {
    let scale = 1.0 + c.re.abs();
    c.im.abs() < 1e-6 * scale && (c.re - c.re.round()).abs() < 1e-6 * scale
}

/// Least degree of an irreducible factor over Q of the primitive `T`-division
/// polynomial, by brute force over subsets of its complex roots. A rational
/// monic factor `f` of an integer polynomial with leading coefficient `lc`
/// has `lc · f` integral, and the least-degree such subset is irreducible.
pub fn minimal_factor_degree(curve: &CurveModel, t: u64) -> usize {
    let p = primitive_division_polynomial(curve, t).expect("division polynomial");
    let coeffs: Vec<f64> = p.coeffs.iter().map(|c| c.to_f64().expect("fits f64")).collect();
    let lc = *coeffs.last().expect("nonzero");
    let balls: Vec<Ball64> = coeffs.iter().map(|&c| Ball64::exact(Complex::new(c, 0.0))).collect();
    let roots: Vec<C64> = poly_roots(&balls).iter().map(|b| b.mid).collect();
    let n = roots.len();
    assert_eq!(n, coeffs.len() - 1, "all roots isolated");
    assert!(n <= 20, "subset search is exponential in the degree");
    let mut best = n;
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k >= best {
            continue;
        }
        let subset: Vec<C64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| roots[i]).collect();
        if scaled_product(lc, &subset).into_iter().all(near_integer) {
            best = k;
        }
    }
    best
}
