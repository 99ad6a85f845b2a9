//! Translated branches `ψ_j(κ) = φ_j(w₀ + κ w₁) − κ μ_j` and their
//! implicitization by numerical nullspace.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::newton::{principal_pow, PairRelation, PuiseuxBranch};
use super::poly::NumericBivariate;
use super::r64_str;
use crate::ball::CBall;
use crate::numeric::{jacobi_svd, C64};
use crate::{Error, Result};

type Ball = CBall<f64>;

/// Relative singular-value threshold below which a nullspace is accepted.
pub const NULLSPACE_TOLERANCE: f64 = 1e-8;

/// A truncated Laurent-Puiseux series in `κ` as `κ → ∞`. Terms with exponent
/// at or below `remainder` are not reliable; `None` means the series is exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    pub terms: Vec<SeriesTerm>,
    #[serde(with = "r64_str::option")]
    pub remainder: Option<Rational64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    #[serde(with = "r64_str")]
    pub exponent: Rational64,
    pub coeff: Ball,
}

fn max_rem(a: Option<Rational64>, b: Option<Rational64>) -> Option<Rational64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl TruncatedSeries {
    fn from_map(map: BTreeMap<Rational64, Ball>, remainder: Option<Rational64>) -> Self {
        let mut terms: Vec<SeriesTerm> = map
            .into_iter()
            .filter(|(e, c)| !c.contains_zero() && remainder.map_or(true, |r| *e > r))
            .map(|(exponent, coeff)| SeriesTerm { exponent, coeff })
            .collect();
        terms.reverse();
        TruncatedSeries { terms, remainder }
    }

    pub fn constant(c: Ball) -> Self {
        let mut map = BTreeMap::new();
        map.insert(Rational64::zero(), c);
        Self::from_map(map, None)
    }

    pub fn is_exact(&self) -> bool {
        self.remainder.is_none()
    }

    pub fn leading_exponent(&self) -> Option<Rational64> {
        self.terms.first().map(|t| t.exponent)
    }

    /// Midpoint value at `κ` with principal fractional powers.
    pub fn eval(&self, kappa: C64) -> C64 {
        self.terms.iter().map(|t| t.coeff.mid * principal_pow(kappa, t.exponent)).sum()
    }

    /// Upper bound on the growth exponent; `None` for the exact zero series.
    fn top(&self) -> Option<Rational64> {
        self.leading_exponent().or(self.remainder)
    }

    pub fn coeff(&self, e: Rational64) -> Option<Ball> {
        self.terms.iter().find(|t| t.exponent == e).map(|t| t.coeff)
    }

    /// Product with remainder `max(rem_a + lead_b, rem_b + lead_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let rem_a = self.remainder.zip(other.top()).map(|(r, l)| r + l);
        let rem_b = other.remainder.zip(self.top()).map(|(r, l)| r + l);
        let remainder = max_rem(rem_a, rem_b);
        let mut map: BTreeMap<Rational64, Ball> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let slot = map.entry(a.exponent + b.exponent).or_insert_with(Ball::zero);
                *slot = *slot + a.coeff * b.coeff;
            }
        }
        Self::from_map(map, remainder)
    }
}

/// `ψ_j(κ) = φ_j(w₀ + κ w₁) − κ μ_j`, expanding each `(w₀ + κ w₁)^e` by the
/// binomial series to `n_terms` terms. Fractional powers use the principal
/// branch of `(κ w₁)^e` for positive real `κ`.
pub fn translate_branch(phi: &[PuiseuxBranch], mu: &[C64], w0: C64, w1: C64, n_terms: usize) -> Result<Vec<TruncatedSeries>> {
    if w1.norm() == 0.0 {
        return Err(Error::DegenerateTranslation);
    }
    if mu.len() != phi.len() {
        return Err(Error::DimensionMismatch { expected: phi.len(), found: mu.len() });
    }
    let ratio = Ball::exact(w0) / Ball::exact(w1);
    let w0_zero = w0.norm() == 0.0;
    let mut out = Vec::with_capacity(phi.len());
    for (branch, m) in phi.iter().zip(mu) {
        let mut map: BTreeMap<Rational64, Ball> = BTreeMap::new();
        let mut remainder = branch.truncation;
        for t in &branch.terms {
            let e = t.exponent;
            let ef = *e.numer() as f64 / *e.denom() as f64;
            let lead = t.coeff * Ball::exact(principal_pow(w1, e)).widen(4.0 * f64::EPSILON * principal_pow(w1, e).norm());
            // Binomial coefficients binom(e, l) terminate for nonnegative integer e.
            let terminates = e.is_integer() && *e.numer() >= 0;
            let last = if w0_zero { 0 } else if terminates { (*e.numer() as usize).min(n_terms) } else { n_terms };
            let mut binom = 1.0f64;
            let mut pow = Ball::one();
            for l in 0..=last {
                let slot = map.entry(e - Rational64::from_integer(l as i64)).or_insert_with(Ball::zero);
                *slot = *slot + (lead * pow).scale(binom);
                binom *= (ef - l as f64) / (l as f64 + 1.0);
                pow = pow * ratio;
            }
            if !w0_zero && !(terminates && *e.numer() as usize <= n_terms) {
                remainder = max_rem(remainder, Some(e - Rational64::from_integer(n_terms as i64 + 1)));
            }
        }
        let slot = map.entry(Rational64::one()).or_insert_with(Ball::zero);
        *slot = *slot - Ball::exact(*m);
        out.push(TruncatedSeries::from_map(map, remainder));
    }
    Ok(out)
}

/// Minimal-degree polynomial `Q(z_a, z_b)` with `Q(ψ_a, ψ_b) ≡ 0`, searched
/// over degrees `1..=cap`.
pub fn implicitize_pair(psi_a: &TruncatedSeries, psi_b: &TruncatedSeries, cap: usize) -> Result<Option<NumericBivariate>> {
    let mut pow_a = vec![TruncatedSeries::constant(Ball::one())];
    let mut pow_b = vec![TruncatedSeries::constant(Ball::one())];
    for d in 1..=cap {
        pow_a.push(pow_a[d - 1].mul(psi_a));
        pow_b.push(pow_b[d - 1].mul(psi_b));
        let monomials: Vec<(u32, u32)> = (0..=d as u32).flat_map(|t| (0..=t).map(move |q| (t - q, q))).collect();
        let columns: Vec<TruncatedSeries> = monomials.iter().map(|&(p, q)| pow_a[p as usize].mul(&pow_b[q as usize])).collect();
        let remainder = columns.iter().fold(None, |acc, c| max_rem(acc, c.remainder));
        let mut exps: Vec<Rational64> = columns.iter().flat_map(|c| c.terms.iter().map(|t| t.exponent)).collect();
        exps.retain(|e| remainder.map_or(true, |r| *e > r));
        exps.sort();
        exps.dedup();
        let unknowns = monomials.len();
        if let Some(rem) = remainder {
            // Count every admissible exponent position, zero rows included.
            let top = exps.last().copied().unwrap_or(rem);
            let step = exps.iter().chain([&rem, &top]).fold(1i64, |acc, e| num_integer::lcm(acc, *e.denom()));
            let rows = ((top - rem) * Rational64::from_integer(step)).to_integer().max(0) as usize;
            if rows < unknowns + 2 {
                return Err(Error::InsufficientTerms { rows, unknowns });
            }
        }
        let mut matrix: Vec<Vec<C64>> = exps
            .iter()
            .map(|&e| columns.iter().map(|c| c.coeff(e).map_or(C64::new(0.0, 0.0), |b| b.mid)).collect())
            .collect();
        while matrix.len() < unknowns {
            matrix.push(vec![C64::new(0.0, 0.0); unknowns]);
        }
        let norms: Vec<f64> = (0..unknowns).map(|j| matrix.iter().map(|r| r[j].norm_sqr()).sum::<f64>().sqrt()).collect();
        if let Some(j) = norms.iter().position(|&n| n == 0.0) {
            let (p, q) = monomials[j];
            return Ok(Some(NumericBivariate::new([((p, q), C64::new(1.0, 0.0))])));
        }
        for row in &mut matrix {
            for (x, n) in row.iter_mut().zip(&norms) {
                *x /= n;
            }
        }
        let svd = jacobi_svd(&matrix, unknowns);
        let smallest = svd.sigma[unknowns - 1];
        if smallest <= NULLSPACE_TOLERANCE * svd.sigma[0] {
            let coeffs: Vec<C64> = svd.v[unknowns - 1].iter().zip(&norms).map(|(v, n)| v / n).collect();
            return Ok(Some(normalize_relation(&monomials, &coeffs)));
        }
    }
    Ok(None)
}

/// Scales the relation so that its graded-lexicographically largest
/// significant monomial has coefficient 1, and drops negligible terms.
fn normalize_relation(monomials: &[(u32, u32)], coeffs: &[C64]) -> NumericBivariate {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let significant: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k].norm() > 1e-8 * max).collect();
    let lead = *significant.iter().max_by_key(|&&k| (monomials[k].0 + monomials[k].1, monomials[k].1)).unwrap();
    let scale = coeffs[lead];
    NumericBivariate::new(significant.iter().map(|&k| (monomials[k], coeffs[k] / scale)))
}

/// For each coordinate pair `(a, b)`, `a < b`, a minimal-degree relation of
/// degree at most `cap` satisfied by the translated branch.
pub fn implicitize_branch(psi: &[TruncatedSeries], cap: usize) -> Result<Vec<PairRelation<C64>>> {
    let mut out = Vec::new();
    for a in 0..psi.len() {
        for b in a + 1..psi.len() {
            let poly = implicitize_pair(&psi[a], &psi[b], cap)?.ok_or(Error::DegreeCapExceeded { cap, i: a, j: b })?;
            out.push(PairRelation { a, b, poly });
        }
    }
    Ok(out)
}
