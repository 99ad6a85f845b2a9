//! Bounded search for torus cosets `z + H` inside the periodic set.
//!
//! Candidates are the fc closures of rational lines `R λ` with `|λ|_∞ ≤ h`
//! and their joins; a candidate is accepted when sampled points of `z + H`
//! are `IN` for a base point `z` already on the set. Findings are certified
//! by sampling only: an empty result is not a proof of absence.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{fc_closure, subspace_classify, subspace_span, Frame};
use crate::numeric::C64;
use crate::uniformization::{wp_eval, FactorValue, ProductTorus, RationalTorusPoint, VarietyDescriptor, Verdict};
use crate::{Error, QuadScalar, Rational, Result, Subspace, TorusCoset};

use super::config::CosetSearch;

/// Sampling evidence behind a finding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetEvidence {
    pub samples: usize,
    pub max_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosetFinding {
    pub coset: TorusCoset,
    /// Complex dimension of the direction.
    pub dimension: usize,
    pub evidence: CosetEvidence,
    /// Lattice vectors whose fc closure produced (part of) the direction.
    pub promoted_from: Vec<Vec<i64>>,
}

impl CosetFinding {
    /// Whether the grid point lies on the coset.
    pub fn contains(&self, r: &RationalTorusPoint) -> Result<bool> {
        self.coset.contains_rational_point(r.coords())
    }
}

/// Primitive vectors of `[-h, h]^n` with positive first nonzero entry.
fn candidate_lines(h: i64, n: usize) -> Vec<Vec<i64>> {
    let side = (2 * h + 1) as u64;
    let mut out = Vec::new();
    for mut idx in 0..side.pow(n as u32) {
        let mut v = vec![0i64; n];
        for slot in v.iter_mut().rev() {
            *slot = (idx % side) as i64 - h;
            idx /= side;
        }
        let Some(first) = v.iter().find(|x| **x != 0) else { continue };
        if *first < 0 || v.iter().fold(0i64, |g, x| g.gcd(x)) != 1 {
            continue;
        }
        out.push(v);
    }
    out
}

fn quad_vec(v: &[i64]) -> Vec<QuadScalar> {
    v.iter().map(|&x| QuadScalar::from_int(x)).collect()
}

struct Sampler<'a> {
    torus: &'a ProductTorus,
    x: &'a VarietyDescriptor,
    tol: f64,
}

impl Sampler<'_> {
    /// Verdict and residual at real lattice coordinates; `None` near poles.
    fn classify(&self, r: &[f64]) -> Result<Option<(Verdict, f64)>> {
        let mut vals = Vec::with_capacity(self.torus.genus());
        for (k, f) in self.torus.factors.iter().enumerate() {
            let z: C64 = f.omega1() * r[2 * k] + f.omega2() * r[2 * k + 1];
            match wp_eval(z, f) {
                Ok((x, y)) => vals.push(FactorValue::Affine { x, y }),
                Err(Error::Pole) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(self.x.classify(&vals, self.tol)))
    }

    /// Certifies `base + H` with `n` random points `base + Σ c_i h_i`,
    /// `c_i ∈ [-1, 1]`; `None` as soon as one point is `OUT`.
    fn certify(&self, base: &[f64], h: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Result<Option<CosetEvidence>> {
        let mut max_residual = 0.0f64;
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < n {
            attempts += 1;
            if attempts > 4 * n {
                return Ok(None);
            }
            let mut r = base.to_vec();
            for v in h {
                let c: f64 = rng.gen_range(-1.0..=1.0);
                for (x, y) in r.iter_mut().zip(v) {
                    *x += c * y;
                }
            }
            // Samples near a pole may stay UNCERTAIN; only OUT refutes.
            match self.classify(&r)? {
                None | Some((Verdict::Uncertain, _)) => continue,
                Some((Verdict::In, res)) => {
                    max_residual = max_residual.max(res);
                    accepted += 1;
                }
                Some((Verdict::Out, _)) => return Ok(None),
            }
        }
        Ok(Some(CosetEvidence { samples: n, max_residual }))
    }
}

/// Direction `H` in the lattice frame with the lines that generated it.
struct Candidate {
    direction: Subspace,
    lines: BTreeSet<Vec<i64>>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Base points: `IN` grid points of denominator at most `base_t`, deduped,
/// in increasing denominator then lexicographic order.
fn base_points(x: &VarietyDescriptor, torus: &ProductTorus, search: &CosetSearch, tol: f64) -> Result<Vec<RationalTorusPoint>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in 1..=search.base_t {
        let rec = crate::counting::enumerate_rational_points(x, torus, t, tol, None)?;
        for p in rec.points.into_iter().filter(|p| p.verdict == Verdict::In) {
            if seen.insert(p.point.clone()) {
                out.push(p.point);
            }
        }
    }
    out.truncate(search.max_bases);
    Ok(out)
}

fn make_coset(torus: &ProductTorus, base: &RationalTorusPoint, direction: &Subspace) -> Result<TorusCoset> {
    let b: Vec<QuadScalar> = base.coords().iter().map(|c| QuadScalar::rational(c.clone())).collect();
    TorusCoset::new(b, direction.clone(), &torus.lattice, &torus.complex)
}

/// Finds maximal torus cosets through `IN` grid points, sorted by
/// decreasing dimension and then by base point.
pub fn detect_torus_cosets(
    x: &VarietyDescriptor,
    torus: &ProductTorus,
    search: &CosetSearch,
    tol: f64,
    seed: u64,
) -> Result<Vec<CosetFinding>> {
    let g = torus.genus();
    let n = 2 * g;
    if x.g != g {
        return Err(Error::DimensionMismatch { expected: g, found: x.g });
    }
    let cap = search.max_dim.min(g);
    if cap == 0 {
        return Ok(Vec::new());
    }
    let bases = base_points(x, torus, search, tol)?;
    if bases.is_empty() {
        return Ok(Vec::new());
    }

    // Promote every candidate line to its fc closure and group by direction.
    let lines = candidate_lines(search.height, n);
    let closures: Vec<Result<(Vec<i64>, Subspace)>> = lines
        .par_iter()
        .map(|l| {
            let line = subspace_span(Frame::Lattice, n, &[quad_vec(l)])?;
            Ok((l.clone(), fc_closure(&line, &torus.lattice, &torus.complex)?))
        })
        .collect();
    let mut groups: BTreeMap<String, Candidate> = BTreeMap::new();
    for r in closures {
        let (l, h) = r?;
        if h.rank() > 2 * cap {
            continue;
        }
        let key = format!("{:?}", h.vectors());
        groups.entry(key).or_insert_with(|| Candidate { direction: h, lines: BTreeSet::new() }).lines.insert(l);
    }

    let sampler = Sampler { torus, x, tol };
    let base_f: Vec<Vec<f64>> = bases.iter().map(|b| b.to_f64()).collect();
    let mut verified: Vec<(usize, Candidate, CosetEvidence)> = Vec::new();
    let mut frontier: Vec<Candidate> = groups.into_values().collect();
    let mut tested: BTreeSet<String> = BTreeSet::new();
    let mut round = 0u64;
    while !frontier.is_empty() {
        for c in &frontier {
            tested.insert(format!("{:?}", c.direction.vectors()));
        }
        let results: Vec<Result<Vec<(usize, CosetEvidence)>>> = frontier
            .par_iter()
            .enumerate()
            .map(|(ci, c)| {
                let h = c.direction.float_vectors::<f64>();
                let mut hits = Vec::new();
                for (bi, b) in base_f.iter().enumerate() {
                    let mut rng = stream_rng(seed, (round << 48) ^ ((ci as u64) << 16) ^ bi as u64);
                    if let Some(ev) = sampler.certify(b, &h, search.samples, &mut rng)? {
                        hits.push((bi, ev));
                    }
                }
                Ok(hits)
            })
            .collect();
        let before = verified.len();
        for (c, r) in frontier.into_iter().zip(results) {
            let hits = r?;
            if hits.is_empty() {
                continue;
            }
            for (bi, ev) in hits {
                verified.push((bi, Candidate { direction: c.direction.clone(), lines: c.lines.clone() }, ev));
            }
        }
        // Joins of verified directions sharing a base point.
        let mut next: BTreeMap<String, Candidate> = BTreeMap::new();
        for i in before..verified.len() {
            for j in 0..verified.len() {
                if i == j || verified[i].0 != verified[j].0 {
                    continue;
                }
                let joined = verified[i].1.direction.join(&verified[j].1.direction);
                let h = fc_closure(&joined, &torus.lattice, &torus.complex)?;
                let key = format!("{:?}", h.vectors());
                if h.rank() > 2 * cap || h.rank() <= verified[i].1.direction.rank().max(verified[j].1.direction.rank()) || tested.contains(&key) {
                    continue;
                }
                let lines: BTreeSet<Vec<i64>> = verified[i].1.lines.union(&verified[j].1.lines).cloned().collect();
                next.entry(key).or_insert_with(|| Candidate { direction: h, lines: BTreeSet::new() }).lines.extend(lines);
            }
        }
        frontier = next.into_values().collect();
        round += 1;
    }

    // Keep maximal cosets: drop a finding whose direction sits inside a
    // larger verified direction whose coset contains its base point.
    let mut findings: Vec<CosetFinding> = Vec::new();
    for (bi, c, ev) in &verified {
        let dominated = verified.iter().any(|(bj, d, _)| {
            d.direction.rank() > c.direction.rank()
                && c.direction.is_subspace_of(&d.direction)
                && make_coset(torus, &bases[*bj], &d.direction).and_then(|k| k.contains_rational_point(bases[*bi].coords())).unwrap_or(false)
        });
        if dominated {
            continue;
        }
        let coset = make_coset(torus, &bases[*bi], &c.direction)?;
        let duplicate = findings.iter().any(|f| {
            f.coset.direction == c.direction && f.coset.contains_rational_point(bases[*bi].coords()).unwrap_or(false)
        });
        if duplicate {
            continue;
        }
        findings.push(CosetFinding {
            coset,
            dimension: c.direction.rank() / 2,
            evidence: ev.clone(),
            promoted_from: c.lines.iter().take(8).cloned().collect(),
        });
    }
    findings.sort_by(|a, b| {
        b.dimension.cmp(&a.dimension).then_with(|| {
            let ka = (format!("{:?}", a.coset.direction.vectors()), base_key(&a.coset.base));
            let kb = (format!("{:?}", b.coset.direction.vectors()), base_key(&b.coset.base));
            ka.cmp(&kb)
        })
    });
    Ok(findings)
}

fn base_key(b: &[QuadScalar]) -> Vec<Rational> {
    b.iter().map(|x| x.rational_part().clone()).collect()
}

/// Re-checks that every finding's direction is full and complex.
pub fn findings_are_full_complex(findings: &[CosetFinding], torus: &ProductTorus) -> Result<bool> {
    for f in findings {
        let c = subspace_classify(&f.coset.direction, &torus.lattice, &torus.complex)?;
        if !(c.is_full && c.is_complex) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether a grid point lies on any of the cosets.
pub fn on_any_coset(findings: &[CosetFinding], r: &RationalTorusPoint) -> Result<bool> {
    for f in findings {
        if f.contains(r)? {
            return Ok(true);
        }
    }
    Ok(false)
}
