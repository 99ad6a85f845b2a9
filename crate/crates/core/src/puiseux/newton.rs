//! Newton-Puiseux expansion of the branches of `G(x, y) = 0` as `|x| → ∞`.
//!
//! The substitution `x = 1/u` turns expansions at infinity into expansions at
//! `u = 0`; the engine below works with generalized polynomials in `u` with
//! rational exponents and ball coefficients. A coefficient whose ball
//! contains zero is treated as an exact cancellation and dropped.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{BivariatePoly, PolyCoeff};
use super::r64_str;
use crate::ball::CBall;
use crate::numeric::{cluster_roots, interpolate_on_circle, poly_roots, resultant, C64};
use crate::{Error, Result};

type Ball = CBall<f64>;

/// `Σ c u^e y^j`, keyed by `(j, e)`.
#[derive(Clone, Debug, Default)]
pub(crate) struct GenPoly {
    terms: BTreeMap<(u32, Rational64), Ball>,
}

impl GenPoly {
    /// `G(1/u, y)`.
    pub(crate) fn at_infinity<C: PolyCoeff>(g: &BivariatePoly<C>) -> Self {
        let mut p = GenPoly::default();
        for (&(i, j), c) in g.terms() {
            p.add(j, Rational64::from_integer(-(i as i64)), Ball::exact(c.to_c64()));
        }
        p.cleaned()
    }

    fn add(&mut self, j: u32, e: Rational64, c: Ball) {
        let slot = self.terms.entry((j, e)).or_insert_with(Ball::zero);
        *slot = *slot + c;
    }

    fn cleaned(mut self) -> Self {
        self.terms.retain(|_, c| !c.contains_zero());
        self
    }

    fn min_j(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).min()
    }

    /// `∂/∂y`.
    pub(crate) fn dy(&self) -> Self {
        let mut p = GenPoly::default();
        for (&(j, e), c) in &self.terms {
            if j > 0 {
                p.add(j - 1, e, c.scale(j as f64));
            }
        }
        p.cleaned()
    }

    /// `P(u, c u^γ + y')`.
    pub(crate) fn substitute(&self, c: Ball, gamma: Rational64) -> Self {
        let max_j = self.terms.keys().map(|k| k.0).max().unwrap_or(0) as usize;
        let mut pow = vec![Ball::one()];
        for k in 1..=max_j {
            pow.push(pow[k - 1] * c);
        }
        let mut out = GenPoly::default();
        for (&(j, e), a) in &self.terms {
            let mut binom = 1.0f64;
            for k in 0..=j {
                let shift = gamma * Rational64::from_integer((j - k) as i64);
                out.add(k, e + shift, (*a * pow[(j - k) as usize]).scale(binom));
                binom = binom * (j - k) as f64 / (k + 1) as f64;
            }
        }
        out.cleaned()
    }

    /// Terms free of `y`, as `(x-exponent, coefficient)` in decreasing order.
    pub(crate) fn y_free_terms(&self) -> Vec<(Rational64, Ball)> {
        let mut v: Vec<(Rational64, Ball)> = self.terms.iter().filter(|(k, _)| k.0 == 0).map(|(k, c)| (-k.1, *c)).collect();
        v.sort_by(|a, b| b.0.cmp(&a.0));
        v
    }

    /// Lower convex hull of the points `(j, min exponent of y^j)`.
    fn lower_hull(&self) -> Vec<(u32, Rational64)> {
        let mut val: BTreeMap<u32, Rational64> = BTreeMap::new();
        for &(j, e) in self.terms.keys() {
            val.entry(j).and_modify(|v| *v = (*v).min(e)).or_insert(e);
        }
        let mut hull: Vec<(u32, Rational64)> = Vec::new();
        for (j, v) in val {
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = Rational64::from_integer((a.0 - o.0) as i64) * (v - o.1)
                    - (a.1 - o.1) * Rational64::from_integer((j - o.0) as i64);
                if cross <= Rational64::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push((j, v));
        }
        hull
    }

    /// Hull edges with `γ` strictly above `prev`, as `(γ, left, right)` where
    /// `y ~ c u^γ` along the edge.
    fn edges(&self, prev: Option<Rational64>) -> Vec<(Rational64, (u32, Rational64), (u32, Rational64))> {
        let hull = self.lower_hull();
        hull.windows(2)
            .map(|w| {
                let slope = (w[1].1 - w[0].1) / Rational64::from_integer((w[1].0 - w[0].0) as i64);
                (-slope, w[0], w[1])
            })
            .filter(|(g, _, _)| prev.map_or(true, |p| *g > p))
            .collect()
    }

    /// Coefficients of the edge polynomial `Σ a_j c^{j - j1}`.
    fn edge_poly(&self, gamma: Rational64, left: (u32, Rational64), right: (u32, Rational64)) -> Vec<Ball> {
        (left.0..=right.0)
            .map(|j| {
                let e = left.1 - gamma * Rational64::from_integer((j - left.0) as i64);
                self.terms.get(&(j, e)).copied().unwrap_or_else(Ball::zero)
            })
            .collect()
    }
}

/// A candidate leading coefficient with its multiplicity as an edge root.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeadingCoefficient {
    pub coeff: Ball,
    pub multiplicity: usize,
}

/// One edge of the Newton polygon at infinity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonEdge {
    /// Leading exponent of `y` in `x` for the branches governed by this edge.
    #[serde(with = "r64_str")]
    pub exponent: Rational64,
    /// Monomials `(i, j)` of `G` lying on the edge.
    pub points: Vec<(i64, u32)>,
    pub leading: Vec<LeadingCoefficient>,
}

/// One term `c x^e` of a branch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PuiseuxTerm {
    #[serde(with = "r64_str")]
    pub exponent: Rational64,
    pub coeff: Ball,
}

/// A Puiseux series `Σ c_k x^{e_k}` in the base coordinate `z_base`, valid for
/// `|x| > radius`. Exponents decrease strictly and share the denominator
/// `ramification`; `truncation` is the exponent of the first omitted term,
/// absent when the series is exact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PuiseuxBranch {
    pub base: usize,
    pub ramification: u32,
    pub terms: Vec<PuiseuxTerm>,
    #[serde(with = "r64_str::option")]
    pub truncation: Option<Rational64>,
    pub radius: f64,
}

impl PuiseuxBranch {
    /// The branch `φ(z) = z`.
    pub fn identity(base: usize) -> Self {
        PuiseuxBranch {
            base,
            ramification: 1,
            terms: vec![PuiseuxTerm { exponent: Rational64::one(), coeff: Ball::one() }],
            truncation: None,
            radius: 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.truncation.is_none()
    }

    /// `None` for the zero series.
    pub fn leading_exponent(&self) -> Option<Rational64> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn leading_coefficient(&self) -> Option<Ball> {
        self.terms.first().map(|t| t.coeff)
    }

    /// Exponents strictly decrease and share the denominator `ramification`.
    pub fn is_well_formed(&self) -> bool {
        let m = Rational64::from_integer(self.ramification as i64);
        self.ramification >= 1
            && self.terms.windows(2).all(|w| w[0].exponent > w[1].exponent)
            && self.terms.iter().all(|t| (t.exponent * m).is_integer())
    }

    /// Midpoint value with principal fractional powers.
    pub fn eval(&self, x: C64) -> C64 {
        self.terms.iter().map(|t| t.coeff.mid * principal_pow(x, t.exponent)).sum()
    }
}

/// `x^e` on the principal branch.
pub fn principal_pow(x: C64, e: Rational64) -> C64 {
    if e.is_integer() {
        x.powi(*e.numer() as i32)
    } else {
        x.powf(*e.numer() as f64 / *e.denom() as f64)
    }
}

fn validate(g: &BivariatePoly<impl PolyCoeff>) -> Result<()> {
    if g.is_zero() {
        return Err(Error::Validation("the zero polynomial has no branches".into()));
    }
    Ok(())
}

/// Edges of the Newton polygon of `G(1/u, y)` at `u = 0`; empty for constant `G`.
pub fn newton_polygon_at_infinity<C: PolyCoeff>(g: &BivariatePoly<C>) -> Result<Vec<NewtonEdge>> {
    validate(g)?;
    let p = GenPoly::at_infinity(g);
    Ok(p.edges(None)
        .into_iter()
        .map(|(gamma, l, r)| {
            let points = (l.0..=r.0)
                .filter_map(|j| {
                    let e = l.1 - gamma * Rational64::from_integer((j - l.0) as i64);
                    p.terms.contains_key(&(j, e)).then(|| (-e.to_integer(), j))
                })
                .collect();
            let leading = cluster_roots(&poly_roots(&p.edge_poly(gamma, l, r)))
                .into_iter()
                .map(|k| LeadingCoefficient { coeff: k.center, multiplicity: k.multiplicity })
                .collect();
            NewtonEdge { exponent: -gamma, points, leading }
        })
        .collect())
}

/// Numerical squarefreeness in `y`: the discriminant in `y` is not
/// identically zero at three fixed sample abscissae.
pub fn is_squarefree_in_y<C: PolyCoeff>(g: &BivariatePoly<C>) -> bool {
    if g.deg_y() <= 1 {
        return true;
    }
    let samples = [C64::new(0.37, 0.61), C64::new(-1.13, 0.29), C64::new(0.83, -1.71)];
    samples.iter().any(|&x| {
        let p = g.y_coeffs_at(x);
        let q = g.dy_coeffs_at(x);
        let norm = |v: &[C64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let n = p.len() - 1;
        let scale = norm(&p).powi(n as i32 - 1) * norm(&q).powi(n as i32);
        resultant(&p, &q).norm() > 1e-10 * scale
    })
}

/// Heuristic convergence radius: twice the largest modulus among the roots
/// of the discriminant and of the leading coefficient in `y`, at least 1.
pub fn convergence_radius<C: PolyCoeff>(g: &BivariatePoly<C>) -> f64 {
    let n = g.deg_y() as usize;
    let dx = g.deg_x() as usize;
    let mut polys: Vec<Vec<C64>> = Vec::new();
    let mut lead = vec![C64::new(0.0, 0.0); dx + 1];
    for (&(i, j), c) in g.terms() {
        if j as usize == n {
            lead[i as usize] += c.to_c64();
        }
    }
    polys.push(lead);
    if n >= 2 && dx > 0 {
        let deg = (2 * n - 1) * dx;
        let count = deg + 1;
        let values: Vec<C64> = (0..count)
            .map(|k| {
                let x = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / count as f64);
                resultant(&g.y_coeffs_at(x), &g.dy_coeffs_at(x))
            })
            .collect();
        polys.push(interpolate_on_circle(&values, 1.0));
    }
    let mut max_root = 0.0f64;
    for coeffs in polys {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        let trimmed: Vec<Ball> = coeffs
            .iter()
            .map(|&c| if c.norm() <= 1e-9 * scale { Ball::zero() } else { Ball::exact(c) })
            .collect();
        for r in poly_roots(&trimmed) {
            max_root = max_root.max(r.mid.norm());
        }
    }
    (2.0 * max_root).max(1.0)
}

/// One determination: terms as `(γ, c)` with `y ~ Σ c u^γ`.
#[derive(Clone, Debug)]
struct Determination {
    terms: Vec<(Rational64, Ball)>,
    exact: bool,
    next_gamma: Option<Rational64>,
}

fn expand_level(p: &GenPoly, prev: Option<Rational64>, depth: usize, prefix: &mut Vec<(Rational64, Ball)>, out: &mut Vec<Determination>) {
    let min_j = match p.min_j() {
        Some(j) => j,
        None => {
            out.push(Determination { terms: prefix.clone(), exact: true, next_gamma: None });
            return;
        }
    };
    if min_j > 0 {
        out.push(Determination { terms: prefix.clone(), exact: true, next_gamma: None });
    }
    let edges = p.edges(prev);
    if depth == 0 {
        for (gamma, l, r) in edges {
            for _ in l.0..r.0 {
                out.push(Determination { terms: prefix.clone(), exact: false, next_gamma: Some(gamma) });
            }
        }
        return;
    }
    for (gamma, l, r) in edges {
        for cluster in cluster_roots(&poly_roots(&p.edge_poly(gamma, l, r))) {
            prefix.push((gamma, cluster.center));
            expand_level(&p.substitute(cluster.center, gamma), Some(gamma), depth - 1, prefix, out);
            prefix.pop();
        }
    }
}

fn ramification_of(terms: &[(Rational64, Ball)]) -> i64 {
    terms.iter().fold(1i64, |m, (g, _)| m.lcm(g.denom()))
}

/// The conjugate determination under `x^{1/m} → ω x^{1/m}`, `ω = e^{2πi l/m}`.
fn conjugate(terms: &[(Rational64, Ball)], m: i64, l: i64) -> Vec<(Rational64, Ball)> {
    terms
        .iter()
        .map(|&(g, c)| {
            // Exponent in x is -γ; the root of unity acts by ω^{-γ m}.
            let n = -(g * Rational64::from_integer(m)).to_integer();
            let angle = 2.0 * std::f64::consts::PI * ((n * l).rem_euclid(m)) as f64 / m as f64;
            (g, c * Ball::exact(C64::from_polar(1.0, angle)))
        })
        .collect()
}

fn same_terms(a: &[(Rational64, Ball)], b: &[(Rational64, Ball)]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((ga, ca), (gb, cb))| {
            ga == gb && (ca.mid - cb.mid).norm() <= ca.rad + cb.rad + 1e-9 * (1.0 + ca.mid.norm())
        })
}

/// Partitions determinations into conjugation cycles; `None` when the
/// truncated expansions are too short to tell determinations apart.
fn group_cycles(dets: &[Determination]) -> Option<Vec<Vec<usize>>> {
    let mut assigned = vec![false; dets.len()];
    let mut cycles = Vec::new();
    for i in 0..dets.len() {
        if assigned[i] {
            continue;
        }
        let m = ramification_of(&dets[i].terms);
        let mut cycle = vec![i];
        assigned[i] = true;
        for l in 1..m {
            let conj = conjugate(&dets[i].terms, m, l);
            let hit = (0..dets.len()).find(|&k| !assigned[k] && dets[k].exact == dets[i].exact && same_terms(&dets[k].terms, &conj))?;
            assigned[hit] = true;
            cycle.push(hit);
        }
        // A remaining determination identical to this one means the
        // expansions have not separated yet.
        if (0..dets.len()).any(|k| !assigned[k] && same_terms(&dets[k].terms, &dets[i].terms)) {
            return None;
        }
        cycles.push(cycle);
    }
    Some(cycles)
}

fn order_key(terms: &[(Rational64, Ball)], a: &[(Rational64, Ball)]) -> std::cmp::Ordering {
    for ((ga, ca), (gb, cb)) in terms.iter().zip(a) {
        let o = ga.cmp(gb).then_with(|| cmp_lex(ca.mid, cb.mid));
        if o.is_ne() {
            return o;
        }
    }
    terms.len().cmp(&a.len())
}

fn cmp_lex(a: C64, b: C64) -> std::cmp::Ordering {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
    if !close(a.re, b.re) {
        return a.re.total_cmp(&b.re);
    }
    if !close(a.im, b.im) {
        return a.im.total_cmp(&b.im);
    }
    std::cmp::Ordering::Equal
}

fn to_branch(det: &Determination, n_terms: usize, m: i64, base: usize, radius: f64) -> PuiseuxBranch {
    let keep = det.terms.len().min(n_terms);
    let truncation = if det.terms.len() > n_terms {
        Some(-det.terms[n_terms].0)
    } else if det.exact {
        None
    } else {
        det.next_gamma.map(|g| -g)
    };
    PuiseuxBranch {
        base,
        ramification: m as u32,
        terms: det.terms[..keep].iter().map(|&(g, c)| PuiseuxTerm { exponent: -g, coeff: c }).collect(),
        truncation,
        radius,
    }
}

/// Every determination (conjugates listed separately), each tagged with the
/// ramification index of its cycle.
fn expand_all<C: PolyCoeff>(g: &BivariatePoly<C>, n_terms: usize, base: usize) -> Result<Vec<(PuiseuxBranch, usize)>> {
    validate(g)?;
    if n_terms == 0 {
        return Err(Error::Validation("n_terms must be at least 1".into()));
    }
    if g.deg_y() == 0 {
        return Err(Error::Validation("polynomial does not involve y".into()));
    }
    if !is_squarefree_in_y(g) {
        return Err(Error::NotSquarefree);
    }
    let p = GenPoly::at_infinity(g);
    let radius = convergence_radius(g);
    let mut depth = n_terms;
    loop {
        let mut dets = Vec::new();
        expand_level(&p, None, depth, &mut Vec::new(), &mut dets);
        let grouped = group_cycles(&dets);
        if grouped.is_none() && depth < n_terms + 16 {
            depth += 4;
            continue;
        }
        let cycles = grouped.unwrap_or_else(|| {
            log::warn!("Puiseux determinations did not separate after {depth} terms");
            (0..dets.len()).map(|i| vec![i]).collect()
        });
        let total: usize = cycles.iter().map(|c| c.len()).sum();
        if total != g.deg_y() as usize {
            log::warn!("found {total} determinations for y-degree {}", g.deg_y());
        }
        let mut out = Vec::new();
        for (cid, cycle) in cycles.iter().enumerate() {
            let m = cycle.len() as i64;
            for &i in cycle {
                out.push((to_branch(&dets[i], n_terms, m, base, radius), cid));
            }
        }
        return Ok(out);
    }
}

/// One representative per conjugation cycle of branches at infinity,
/// expanded to `n_terms` terms. `Σ ramification = deg_y G`.
///
/// Representatives are the conjugates with the lexicographically smallest
/// coefficient sequence; branches are ordered by leading exponent (largest
/// first), then by coefficients.
pub fn puiseux_expand<C: PolyCoeff>(g: &BivariatePoly<C>, n_terms: usize) -> Result<Vec<PuiseuxBranch>> {
    let all = expand_all(g, n_terms, 0)?;
    let mut reps: BTreeMap<usize, PuiseuxBranch> = BTreeMap::new();
    for (b, cid) in all {
        match reps.get(&cid) {
            Some(cur) if order_key(&as_terms(cur), &as_terms(&b)).is_le() => {}
            _ => {
                reps.insert(cid, b);
            }
        }
    }
    let mut out: Vec<PuiseuxBranch> = reps.into_values().collect();
    out.sort_by(|a, b| order_key(&as_terms(a), &as_terms(b)));
    Ok(out)
}

/// All `deg_y G` determinations, conjugates included, in the base coordinate `base`.
pub fn puiseux_determinations<C: PolyCoeff>(g: &BivariatePoly<C>, n_terms: usize, base: usize) -> Result<Vec<PuiseuxBranch>> {
    let mut out: Vec<PuiseuxBranch> = expand_all(g, n_terms, base)?.into_iter().map(|(b, _)| b).collect();
    out.sort_by(|a, b| order_key(&as_terms(a), &as_terms(b)));
    Ok(out)
}

fn as_terms(b: &PuiseuxBranch) -> Vec<(Rational64, Ball)> {
    b.terms.iter().map(|t| (-t.exponent, t.coeff)).collect()
}

/// `G(x, φ(x))` computed as a generalized series in ball arithmetic, with
/// provably cancelled coefficients removed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub terms: Vec<PuiseuxTerm>,
}

impl ResidualSeries {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_exponent(&self) -> Option<Rational64> {
        self.terms.first().map(|t| t.exponent)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.terms.iter().map(|t| t.coeff.mid * principal_pow(x, t.exponent)).sum()
    }
}

fn substitute_branch(mut p: GenPoly, branch: &PuiseuxBranch) -> ResidualSeries {
    for t in &branch.terms {
        p = p.substitute(t.coeff, -t.exponent);
    }
    ResidualSeries { terms: p.y_free_terms().into_iter().map(|(e, c)| PuiseuxTerm { exponent: e, coeff: c }).collect() }
}

/// Residual of substituting the truncated branch into `G`.
pub fn branch_residual<C: PolyCoeff>(g: &BivariatePoly<C>, branch: &PuiseuxBranch) -> ResidualSeries {
    substitute_branch(GenPoly::at_infinity(g), branch)
}

/// Predicted leading exponent of the residual: the leading exponent of
/// `∂G/∂y` along the branch plus the exponent of the first omitted term.
/// `None` for exact branches.
pub fn predicted_residual_exponent<C: PolyCoeff>(g: &BivariatePoly<C>, branch: &PuiseuxBranch) -> Option<Rational64> {
    let next = branch.truncation?;
    let lead = branch.terms.first().map(|t| PuiseuxBranch { terms: vec![t.clone()], ..branch.clone() })?;
    let dg = substitute_branch(GenPoly::at_infinity(g).dy(), &lead);
    Some(dg.leading_exponent()? + next)
}

/// Least-squares slope of `log |f(t e^{iθ})|` against `log t` over
/// logarithmically spaced `t ∈ [t0, t1]`.
pub fn log_log_slope(f: impl Fn(C64) -> C64, theta: f64, t0: f64, t1: f64, samples: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let t = t0 * (t1 / t0).powf(k as f64 / (samples - 1) as f64);
            (t.ln(), f(Complex::from_polar(t, theta)).norm().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `G(z_a, z_b) = 0` relating two coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "C: PolyCoeff", deserialize = "C: PolyCoeff"))]
pub struct PairRelation<C> {
    pub a: usize,
    pub b: usize,
    pub poly: BivariatePoly<C>,
}

/// A branch of a space curve: one series per coordinate in the base coordinate.
pub type SpaceBranch = Vec<PuiseuxBranch>;

fn sample_points(radius: f64) -> [C64; 2] {
    let r = 1e3 * radius.max(1.0);
    [C64::from_polar(r, 0.3), C64::from_polar(r, 1.9)]
}

/// Consistent `g`-tuples `φ` with `φ_base(z) = z`. Each coordinate is
/// expanded from a relation with the base coordinate; relations between two
/// non-base coordinates filter the combinations.
pub fn branch_of_space_curve<C: PolyCoeff>(relations: &[PairRelation<C>], g: usize, base: usize, n_terms: usize) -> Result<Vec<SpaceBranch>> {
    if base >= g {
        return Err(Error::DimensionMismatch { expected: g, found: base + 1 });
    }
    let mut options: Vec<Vec<PuiseuxBranch>> = Vec::with_capacity(g);
    for j in 0..g {
        if j == base {
            options.push(vec![PuiseuxBranch::identity(base)]);
            continue;
        }
        let poly = relations
            .iter()
            .find_map(|r| match (r.a, r.b) {
                (a, b) if a == base && b == j => Some(r.poly.clone()),
                (a, b) if a == j && b == base => Some(r.poly.swap_vars()),
                _ => None,
            })
            .ok_or(Error::MissingRelation(base, j))?;
        options.push(puiseux_determinations(&poly, n_terms, base)?);
    }
    let radius = options.iter().flatten().map(|b| b.radius).fold(0.0, f64::max);
    let checks: Vec<&PairRelation<C>> = relations.iter().filter(|r| r.a != base && r.b != base).collect();
    let mut tuples: Vec<SpaceBranch> = vec![Vec::new()];
    for opts in &options {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                opts.iter().map(move |b| {
                    let mut t = t.clone();
                    t.push(b.clone());
                    t
                })
            })
            .collect();
    }
    for r in checks {
        if r.a >= g || r.b >= g {
            return Err(Error::DimensionMismatch { expected: g, found: r.a.max(r.b) + 1 });
        }
        tuples.retain(|t| {
            sample_points(radius).iter().all(|&x| {
                let (za, zb) = (t[r.a].eval(x), t[r.b].eval(x));
                r.poly.eval(za, zb).norm() <= 1e-6 * r.poly.magnitude(za, zb)
            })
        });
        if tuples.is_empty() {
            return Err(Error::InconsistentRelations(r.a, r.b));
        }
    }
    for t in &mut tuples {
        for b in t.iter_mut() {
            b.radius = radius;
        }
    }
    Ok(tuples)
}

/// Direction `α` of a linear branch, normalized so that `α_base = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchDirection {
    pub alpha: Vec<Ball>,
}

/// `α` when every component has leading exponent at most 1 (`α_j = 0` below 1).
pub fn linear_branch_direction(phi: &[PuiseuxBranch]) -> Option<BranchDirection> {
    let mut alpha = Vec::with_capacity(phi.len());
    for b in phi {
        match b.terms.first() {
            None => alpha.push(Ball::zero()),
            Some(t) if t.exponent > Rational64::one() => return None,
            Some(t) if t.exponent == Rational64::one() => alpha.push(t.coeff),
            Some(_) => alpha.push(Ball::zero()),
        }
    }
    Some(BranchDirection { alpha })
}

impl BranchDirection {
    pub fn is_nonzero(&self) -> bool {
        self.alpha.iter().any(|a| !a.contains_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::super::poly::ExactBivariate;
    use super::*;

    fn poly(s: &str) -> ExactBivariate {
        ExactBivariate::parse(s).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn newton_polygon_examples() {
        let e = newton_polygon_at_infinity(&poly("x*y - 1")).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].exponent, r(-1, 1));
        let e = newton_polygon_at_infinity(&poly("y^2 - x^2 - 1")).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].exponent, r(1, 1));
        let mut c: Vec<f64> = e[0].leading.iter().map(|l| l.coeff.mid.re).collect();
        c.sort_by(f64::total_cmp);
        assert!((c[0] + 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);
        let e = newton_polygon_at_infinity(&poly("y - 2*x - 1")).unwrap();
        assert_eq!(e[0].exponent, r(1, 1));
        assert!((e[0].leading[0].coeff.mid - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!(newton_polygon_at_infinity(&poly("7")).unwrap().is_empty());
    }

    #[test]
    fn hyperbola_inverse_is_exact() {
        let b = puiseux_expand(&poly("x*y - 1"), 5).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].is_exact());
        assert_eq!(b[0].ramification, 1);
        assert_eq!(b[0].terms.len(), 1);
        assert_eq!(b[0].terms[0].exponent, r(-1, 1));
        assert!(b[0].terms[0].coeff.contains(C64::new(1.0, 0.0)));
    }

    #[test]
    fn hyperbola_matches_binomial_series() {
        // Oracle: x (1 + x^-2)^(1/2) = Σ binom(1/2, k) x^(1 - 2k).
        let b = puiseux_expand(&poly("y^2 - x^2 - 1"), 8).unwrap();
        assert_eq!(b.len(), 2);
        let mut binom = 1.0f64;
        for k in 0..8 {
            for (s, br) in [(-1.0, &b[0]), (1.0, &b[1])] {
                let t = &br.terms[k];
                assert_eq!(t.exponent, r(1 - 2 * k as i64, 1));
                assert!((t.coeff.mid - C64::new(s * binom, 0.0)).norm() < 1e-12, "k={k}");
            }
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        assert_eq!(b[0].truncation, Some(r(-15, 1)));
    }

    #[test]
    fn cusp_branch_is_ramified() {
        let b = puiseux_expand(&poly("y^2 - x^3"), 4).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].ramification, 2);
        assert!(b[0].is_exact());
        assert_eq!(b[0].terms[0].exponent, r(3, 2));
        let all = puiseux_determinations(&poly("y^2 - x^3"), 4, 0).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn ramification_sum_equals_y_degree() {
        for s in ["y^3 - x^2 - y", "y^3 - x*y - x^4 - 1", "y^2 - x^3 - x", "y^4 - x - y*x^2", "x^2*y^2 - y - 1"] {
            let g = poly(s);
            let b = puiseux_expand(&g, 4).unwrap();
            let total: u32 = b.iter().map(|x| x.ramification).sum();
            assert_eq!(total, g.deg_y(), "{s}");
        }
    }

    #[test]
    fn late_ramification_is_detected() {
        // y = x + x^(-1/2): (y - x)^2 = 1/x, i.e. x y^2 - 2 x^2 y + x^3 - 1.
        let g = poly("x*y^2 - 2*x^2*y + x^3 - 1");
        let b = puiseux_expand(&g, 1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].ramification, 2);
        assert_eq!(b[0].terms.len(), 1);
    }

    #[test]
    fn non_squarefree_rejected() {
        assert!(matches!(puiseux_expand(&poly("y^2 - 2*x*y + x^2"), 3), Err(Error::NotSquarefree)));
    }

    #[test]
    fn residual_exponent_matches_prediction() {
        let g = poly("y^2 - x^2 - 1");
        for b in puiseux_expand(&g, 8).unwrap() {
            let res = branch_residual(&g, &b);
            assert_eq!(res.leading_exponent(), predicted_residual_exponent(&g, &b));
            let x = C64::from_polar(3.0, 0.3);
            let direct = g.eval(x, b.eval(x));
            assert!((direct - res.eval(x)).norm() < 1e-6 * res.eval(x).norm());
        }
    }

    #[test]
    fn convergence_radius_examples() {
        // Discriminant of y^2 - x^2 - 1 vanishes at x = ±i.
        assert!((convergence_radius(&poly("y^2 - x^2 - 1")) - 2.0).abs() < 1e-8);
        assert!((convergence_radius(&poly("y^2 - x^2 - 9")) - 6.0).abs() < 1e-6);
        assert_eq!(convergence_radius(&poly("x*y - 1")), 1.0);
    }

    #[test]
    fn space_curve_branches() {
        let rel = |a, b, s: &str| PairRelation { a, b, poly: poly(s) };
        let t = branch_of_space_curve(&[rel(0, 1, "y - x")], 2, 0, 3).unwrap();
        assert_eq!(t.len(), 1);
        let d = linear_branch_direction(&t[0]).unwrap();
        assert!(d.alpha[0].contains(C64::new(1.0, 0.0)) && d.alpha[1].contains(C64::new(1.0, 0.0)));

        let t = branch_of_space_curve(&[rel(0, 1, "y^2 - x^2 - 1")], 2, 0, 4).unwrap();
        assert_eq!(t.len(), 2);
        let t = branch_of_space_curve(&[rel(1, 0, "x*y - 1")], 2, 1, 4).unwrap();
        assert_eq!(t.len(), 1);
        let d = linear_branch_direction(&t[0]).unwrap();
        assert!(d.alpha[1].contains(C64::new(1.0, 0.0)) && d.alpha[0].contains_zero());

        let t = branch_of_space_curve(&[rel(0, 1, "y^2 - x^3")], 2, 0, 2).unwrap();
        assert!(linear_branch_direction(&t[0]).is_none());

        // Three coordinates: z2 = 2 z1, z3 = -z1, and the check z3 = -z2/2.
        let rels = [rel(0, 1, "y - 2*x"), rel(0, 2, "y + x"), rel(1, 2, "2*y + x")];
        let t = branch_of_space_curve(&rels, 3, 0, 2).unwrap();
        assert_eq!(t.len(), 1);
        let bad = [rel(0, 1, "y - 2*x"), rel(0, 2, "y + x"), rel(1, 2, "y - x")];
        assert!(matches!(branch_of_space_curve(&bad, 3, 0, 2), Err(Error::InconsistentRelations(1, 2))));
        assert!(matches!(branch_of_space_curve(&rels[..1], 3, 0, 2), Err(Error::MissingRelation(0, 2))));
    }
}
