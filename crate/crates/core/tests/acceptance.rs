//! Acceptance suite: one PASS/FAIL line per criterion with its runtime budget.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when a criterion outside `KNOWN_RED` fails, and also when a
//! known-red criterion starts passing, so the list cannot go stale.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsion_lab::counting::{counting_table, default_primes, orbit_degree_lower_bound};
use torsion_lab::lattice::{complex_closure, fc_closure, full_closure, subspace_classify, subspace_span, Classification, Frame};
use torsion_lab::numeric::C64;
use torsion_lab::pipeline::{detect_torus_cosets, emit_report, findings_are_full_complex, run_pipeline, OutputFormat};
use torsion_lab::puiseux::{
    branch_residual, implicitize_branch, linear_branch_direction, log_log_slope, predicted_residual_exponent, puiseux_expand,
    translate_branch, ExactBivariate, PuiseuxBranch,
};
use torsion_lab::uniformization::{lattice_invariants, ode_residual, wp_eval, CurveModel, VarietyDescriptor, Verdict};
use torsion_lab::{ComplexStructure, Error, Lattice, QuadScalar, Subspace};

/// Criteria expected to fail; see the decisions ledger for the analysis.
const KNOWN_RED: &[u32] = &[9];

type Outcome = std::result::Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn q(s: &str) -> QuadScalar {
    s.parse().expect("scalar literal")
}

fn qv(xs: &[&str]) -> Vec<QuadScalar> {
    xs.iter().map(|s| q(s)).collect()
}

fn c1() -> Outcome {
    let lat = Lattice::new(vec![qv(&["1", "0", "0", "0"]), qv(&["0", "1", "1", "0"]), qv(&["1", "0", "0", "1"]), qv(&["1", "0", "sqrt(2)", "0"])])
        .map_err(err)?;
    let j = ComplexStructure::standard(&lat).map_err(err)?;
    let h = subspace_span(Frame::Ambient, 4, &[qv(&["1", "0", "0", "0"])]).map_err(err)?;
    let f = full_closure(&h, &lat).map_err(err)?;
    check(f == h, || "f(H) != H".into())?;
    let c = complex_closure(&h, &j).map_err(err)?;
    let c_expected = subspace_span(Frame::Ambient, 4, &[qv(&["1", "0", "0", "0"]), qv(&["0", "1", "0", "0"])]).map_err(err)?;
    check(c == c_expected, || "c(H) != C(1,0)".into())?;
    let class = subspace_classify(&c, &lat, &j).map_err(err)?;
    check(class == Classification { is_full: false, is_complex: true }, || format!("c(H) classified {class:?}"))?;
    let fc = fc_closure(&h, &lat, &j).map_err(err)?;
    let cf = complex_closure(&f, &j).map_err(err)?;
    check(cf.is_subspace_of(&fc) && cf != fc, || "fc(H) does not strictly contain c(f(H))".into())?;
    Ok(format!("f(H)=H, c(H)=C(1,0) not full, dim fc(H)={} > dim c(f(H))={}", fc.rank(), cf.rank()))
}

fn random_scalar(rng: &mut ChaCha8Rng, d: i64) -> QuadScalar {
    let (a, b) = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
    q(&format!("{a}+{b}*sqrt({d})"))
}

fn random_lattice(rng: &mut ChaCha8Rng, d: i64) -> Lattice {
    loop {
        // Integer entries with one irrational entry per basis vector at most.
        let basis: Vec<Vec<QuadScalar>> = (0..4)
            .map(|_| {
                let k = rng.gen_range(0..8);
                (0..4)
                    .map(|i| if i == k { random_scalar(rng, d) } else { QuadScalar::from_int(rng.gen_range(-2..=2)) })
                    .collect()
            })
            .collect();
        if let Ok(l) = Lattice::new(basis) {
            return l;
        }
    }
}

fn random_subspace(rng: &mut ChaCha8Rng, d: i64, frame: Frame) -> Subspace {
    let k = rng.gen_range(1..=3);
    let vs: Vec<Vec<QuadScalar>> = (0..k)
        .map(|_| (0..4).map(|_| if rng.gen_bool(0.6) { random_scalar(rng, d) } else { QuadScalar::from_int(0) }).collect())
        .collect();
    subspace_span(frame, 4, &vs).expect("span")
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut n = 0;
    for case in 0..200 {
        let d = [2, 3, 5][case % 3];
        let lat = random_lattice(&mut rng, d);
        let j = ComplexStructure::standard(&lat).map_err(err)?;
        let frame = if case % 2 == 0 { Frame::Ambient } else { Frame::Lattice };
        let h = random_subspace(&mut rng, d, frame);
        let extra = random_subspace(&mut rng, d, frame);
        let h2 = h.join(&extra);
        let f = |s: &Subspace| full_closure(s, &lat).map_err(err);
        let c = |s: &Subspace| complex_closure(s, &j).map_err(err);
        let fc = |s: &Subspace| fc_closure(s, &lat, &j).map_err(err);
        let (fh, ch, fch) = (f(&h)?, c(&h)?, fc(&h)?);
        let ctx = || format!("case {case} (d={d})");
        check(h.is_subspace_of(&fh) && h.is_subspace_of(&ch) && h.is_subspace_of(&fch), || format!("{}: extensivity", ctx()))?;
        check(f(&fh)? == fh && c(&ch)? == ch && fc(&fch)? == fch, || format!("{}: idempotence", ctx()))?;
        check(
            fh.is_subspace_of(&f(&h2)?) && ch.is_subspace_of(&c(&h2)?) && fch.is_subspace_of(&fc(&h2)?),
            || format!("{}: monotonicity", ctx()),
        )?;
        let class = subspace_classify(&fch, &lat, &j).map_err(err)?;
        check(class.is_full && class.is_complex, || format!("{}: fc output classified {class:?}", ctx()))?;
        n += 1;
    }
    Ok(format!("{n} subspaces over d in {{2,3,5}}"))
}

fn c3() -> Outcome {
    let mut worst = 0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for periods in [("1", "i"), ("1", "2i"), ("1", "-1/2+1/2*sqrt(3)*i")] {
        let t = common::torus(&[periods]);
        let f = &t.factors[0];
        let mut done = 0;
        while done < 100 {
            let z = f.omega1() * rng.gen_range(0.0..1.0) + f.omega2() * rng.gen_range(0.0..1.0);
            let (p, dp) = match wp_eval(z, f) {
                Ok(v) => v,
                Err(Error::Pole) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let r = ode_residual(&p, &dp, &f.g2, &f.g3);
            check(r < 1e-9, || format!("lattice {periods:?}: residual {r:.3e} at z = {z}"))?;
            worst = worst.max(r);
            done += 1;
        }
    }
    let (_, g3_i) = lattice_invariants(Complex::new(1.0, 0.0), Complex::new(0.0, 1.0)).map_err(err)?;
    let (g2_rho, _) = lattice_invariants(Complex::new(1.0, 0.0), Complex::new(-0.5, 3f64.sqrt() / 2.0)).map_err(err)?;
    check(g3_i.contains_zero(), || format!("g3(Z[i]) = {g3_i} excludes 0"))?;
    check(g2_rho.contains_zero(), || format!("g2(Z[rho]) = {g2_rho} excludes 0"))?;
    Ok(format!("300 points, worst residual {worst:.2e}; g3(Z[i]) and g2(Z[rho]) enclose 0"))
}

fn c4() -> Outcome {
    let mut slopes = Vec::new();
    let hyp = ExactBivariate::parse("y^2 - x^2 - 1").map_err(err)?;
    let branches = puiseux_expand(&hyp, 8).map_err(err)?;
    check(branches.len() == 2, || format!("{} branches for the hyperbola", branches.len()))?;
    let mut signs = Vec::new();
    for b in &branches {
        let res = branch_residual(&hyp, b);
        let predicted = predicted_residual_exponent(&hyp, b).ok_or("hyperbola branch should be truncated")?;
        let predicted = *predicted.numer() as f64 / *predicted.denom() as f64;
        let slope = log_log_slope(|x| res.eval(x), 0.3, 8.0, 64.0, 24);
        check((slope - predicted).abs() <= 0.2, || format!("slope {slope:.3} vs predicted {predicted}"))?;
        // The symbolic residual is what G(x, φ(x)) evaluates to directly.
        let x = C64::from_polar(3.0, 0.3);
        let direct = hyp.eval(x, b.eval(x));
        check((direct - res.eval(x)).norm() <= 1e-6 * res.eval(x).norm(), || "residual series disagrees with direct evaluation".into())?;
        slopes.push(format!("{slope:.2}/{predicted}"));
        let dir = linear_branch_direction(&[PuiseuxBranch::identity(0), b.clone()]).ok_or("hyperbola branch is linear")?;
        check(dir.alpha[0].contains(C64::new(1.0, 0.0)), || "alpha_base != 1".into())?;
        let s = [1.0, -1.0].into_iter().find(|&s| dir.alpha[1].contains(C64::new(s, 0.0))).ok_or("direction is not (1, ±1)")?;
        signs.push(s);
    }
    signs.sort_by(f64::total_cmp);
    check(signs == [-1.0, 1.0], || format!("directions {signs:?}"))?;

    let inv = ExactBivariate::parse("x*y - 1").map_err(err)?;
    let branches = puiseux_expand(&inv, 8).map_err(err)?;
    check(branches.len() == 1, || format!("{} branches for xy = 1", branches.len()))?;
    let b = &branches[0];
    check(b.is_exact() && branch_residual(&inv, b).terms.is_empty(), || "y = 1/x should be exact with zero residual".into())?;
    let dir = linear_branch_direction(&[PuiseuxBranch::identity(0), b.clone()]).ok_or("xy = 1 branch is linear")?;
    check(dir.alpha[0].contains(C64::new(1.0, 0.0)) && dir.alpha[1].contains_zero(), || "direction is not (1, 0)".into())?;
    Ok(format!("slopes (fit/predicted) {}; directions (1,±1) and (1,0)", slopes.join(", ")))
}

fn c5() -> Outcome {
    let g = ExactBivariate::parse("y^2 - x^2 - 1").map_err(err)?;
    let phi = vec![PuiseuxBranch::identity(0), puiseux_expand(&g, 10).map_err(err)?.remove(0)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut u = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for k in 0..20 {
        let (mu, w0, w1) = ([u(), u()], u(), u() + C64::new(1.5, 0.0));
        let psi = translate_branch(&phi, &mu, w0, w1, 20).map_err(err)?;
        let rel = implicitize_branch(&psi, 3).map_err(err)?;
        let deg = rel[0].poly.degree();
        check(deg == 2, || format!("translate {k}: degree {deg}"))?;
    }
    Ok("20 translates, all degree 2".into())
}

fn c6() -> Outcome {
    let t = common::torus(&[("1", "i"), ("1", "i")]);
    let x = VarietyDescriptor::parse(&["x2 - x1", "y2 - y1"], 2).map_err(err)?;
    let ts: Vec<u64> = (1..=12).collect();
    let table = counting_table(&x, &t, &ts, 1e-8).map_err(err)?;
    for r in &table.records {
        check(r.n_in == r.t * r.t, || format!("T={}: n_in={} != T^2", r.t, r.n_in))?;
        for p in r.points.iter().filter(|p| p.verdict == Verdict::Uncertain) {
            // Identity-adjacent: some factor sits at the origin of its torus.
            let c = p.point.coords();
            let adjacent = (0..2).any(|k| c[2 * k] == BigInt::from(0).into() && c[2 * k + 1] == BigInt::from(0).into());
            check(adjacent, || format!("T={}: UNCERTAIN away from the identity at {:?}", r.t, p.point))?;
        }
    }
    let e = table.exponent.ok_or("no exponent fitted")?;
    check((1.8..=2.2).contains(&e), || format!("exponent {e:.4}"))?;
    Ok(format!("n_in = T^2 for T = 1..12, exponent {e:.4}"))
}

fn c7() -> Outcome {
    let diag = common::scenario("diagonal.json");
    let (t, x) = diag.build().map_err(err)?;
    let found = detect_torus_cosets(&x, &t, &diag.coset_search, diag.tol, diag.seed).map_err(err)?;
    check(found.len() == 1, || format!("{} findings on the diagonal", found.len()))?;
    check(findings_are_full_complex(&found, &t).map_err(err)?, || "diagonal direction not full and complex".into())?;
    let expected = subspace_span(Frame::Lattice, 4, &[qv(&["1", "0", "1", "0"]), qv(&["0", "1", "0", "1"])]).map_err(err)?;
    check(found[0].coset.direction == expected, || format!("direction {:?}", found[0].coset.direction))?;

    let demo = common::scenario("demo.json");
    check(demo.coset_search.height >= 5, || "demo search height below 5".into())?;
    let (t, x) = demo.build().map_err(err)?;
    let found = detect_torus_cosets(&x, &t, &demo.coset_search, demo.tol, demo.seed).map_err(err)?;
    check(found.is_empty(), || format!("{} findings on the coset-free curve", found.len()))?;
    Ok(format!("diagonal found (dim 1, full, complex); none on the demo curve at height {}", demo.coset_search.height))
}

fn c8() -> Outcome {
    let primes = default_primes();
    let mut rows = Vec::new();
    for (a, b) in [(1, 0), (0, 2)] {
        let curve = CurveModel::from_ints(a, b).map_err(err)?;
        for t in 2..=5u64 {
            let truth = common::minimal_factor_degree(&curve, t) as u64;
            let bound = orbit_degree_lower_bound(&curve, t, &primes).map_err(err)?.lower_bound;
            check(bound <= truth, || format!("(a,b)=({a},{b}) T={t}: bound {bound} > true degree {truth}"))?;
            let mut last = 0;
            for k in [1usize, 2, 4, 8, 16, primes.len()] {
                let b_k = match orbit_degree_lower_bound(&curve, t, &primes[..k]) {
                    Ok(r) => r.lower_bound,
                    Err(Error::AllPrimesBad) => 1,
                    Err(e) => return Err(e.to_string()),
                };
                check(b_k >= last, || format!("(a,b)=({a},{b}) T={t}: bound drops to {b_k} with {k} primes"))?;
                last = b_k;
            }
            rows.push(format!("{bound}<={truth}"));
        }
    }
    Ok(format!("bounds vs true degrees {}", rows.join(" ")))
}

fn c9() -> Outcome {
    let cfg = common::scenario("demo.json");
    let report = run_pipeline(&cfg).map_err(err)?;
    let again = run_pipeline(&cfg).map_err(err)?;
    let (d1, d2) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let f1 = emit_report(&report, d1.path(), OutputFormat::Both).map_err(err)?;
    let f2 = emit_report(&again, d2.path(), OutputFormat::Both).map_err(err)?;
    for (a, b) in f1.iter().zip(&f2) {
        let (x, y) = (std::fs::read(a).map_err(|e| e.to_string())?, std::fs::read(b).map_err(|e| e.to_string())?);
        check(x == y, || format!("{} differs between reruns", a.file_name().unwrap_or_default().to_string_lossy()))?;
    }
    let t_star = report.crossover.ok_or("no crossover T*")?;
    check(report.counts_stabilize, || format!("new points past T* = {t_star}"))?;
    let bounds: Vec<u64> = report.orbits.iter().map(|o| o.lower_bound).collect();
    let counts: BTreeMap<u64, i64> = report.exact_order.iter().map(|e| (e.t, e.n_in + e.n_uncertain)).collect();
    let summary = format!("T* = {t_star}, exact-order counts {:?}, orbit bounds {bounds:?}", counts.values().collect::<Vec<_>>());
    if let Some(w) = bounds.windows(2).position(|w| w[0] > w[1]) {
        let (t0, t1) = (report.orbits[w].t, report.orbits[w + 1].t);
        return Err(format!("{summary}; orbit bounds decrease from T={t0} ({}) to T={t1} ({})", bounds[w], bounds[w + 1]));
    }
    check(bounds.last() > bounds.first(), || format!("{summary}; orbit bounds do not grow"))?;
    Ok(summary)
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 9] = [
        (1, "counterexample reproduction", 1, c1),
        (2, "closure law suite", 30, c2),
        (3, "wp certification", 10, c3),
        (4, "Puiseux residual and directions", 5, c4),
        (5, "implicitization degree invariance", 10, c5),
        (6, "coset counting law", 120, c6),
        (7, "coset detection", 120, c7),
        (8, "orbit-bound soundness", 30, c8),
        (9, "endgame property", 300, c9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (n, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => Err(format!("{detail}; over the {budget} s budget")),
            o => o,
        };
        let red = KNOWN_RED.contains(&n);
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        let note = if red && outcome.is_err() { " [known red]" } else { "" };
        println!("{tag} criterion {n} ({name}) in {:.2} s / {budget} s{note}: {detail}", elapsed.as_secs_f64());
        if outcome.is_err() != red {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
