//! Grid enumeration of rational points `k/T` on the periodic set and the
//! resulting counting tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::uniformization::variety::decide_with;
use crate::uniformization::{EllipticFactor, FactorValue, ProductTorus, RationalTorusPoint, VarietyDescriptor, Verdict};
use crate::{Error, Rational, Result};

/// Grid points per parallel work unit.
const CHUNK: u64 = 2048;

/// A scanned point whose verdict is `IN` or `UNCERTAIN`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedPoint {
    pub point: RationalTorusPoint,
    pub verdict: Verdict,
    /// Largest relation residual bound; absent when unbounded.
    pub residual: Option<f64>,
}

/// Points of denominator dividing `T` on the periodic set, over the grid
/// index range `range` of the `total = T^{2g}` candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    #[serde(rename = "T")]
    pub t: u64,
    pub n_in: u64,
    pub n_uncertain: u64,
    pub range: (u64, u64),
    pub total: u64,
    /// `IN` and `UNCERTAIN` points in lexicographic order of the grid index.
    pub points: Vec<ClassifiedPoint>,
    pub seconds: f64,
}

impl CountRecord {
    /// Recounts after dropping the points rejected by `keep`.
    pub fn filtered(&self, keep: impl Fn(&RationalTorusPoint) -> bool) -> CountRecord {
        let points: Vec<ClassifiedPoint> = self.points.iter().filter(|p| keep(&p.point)).cloned().collect();
        CountRecord {
            n_in: points.iter().filter(|p| p.verdict == Verdict::In).count() as u64,
            n_uncertain: points.iter().filter(|p| p.verdict == Verdict::Uncertain).count() as u64,
            points,
            ..self.clone()
        }
    }
}

/// `(℘, ℘')` of one factor at every `(a/T, b/T)`, in both precisions.
struct FactorTable {
    low: Vec<FactorValue<f32>>,
    high: Vec<FactorValue<f64>>,
}

fn factor_value<F: crate::Real>(f: &EllipticFactor, r1: &Rational, r2: &Rational) -> Result<FactorValue<F>> {
    match f.wp_rational::<F>(r1, r2) {
        Ok(None) => Ok(FactorValue::Identity),
        Ok(Some((x, y))) => Ok(FactorValue::Affine { x, y }),
        Err(Error::Pole) => Ok(FactorValue::NearPole),
        Err(e) => Err(e),
    }
}

fn factor_table(f: &EllipticFactor, t: u64) -> Result<FactorTable> {
    let mut low = Vec::with_capacity((t * t) as usize);
    let mut high = Vec::with_capacity((t * t) as usize);
    for a in 0..t {
        for b in 0..t {
            let r1 = Rational::new((a as i64).into(), (t as i64).into());
            let r2 = Rational::new((b as i64).into(), (t as i64).into());
            low.push(factor_value::<f32>(f, &r1, &r2)?);
            high.push(factor_value::<f64>(f, &r1, &r2)?);
        }
    }
    Ok(FactorTable { low, high })
}

fn grid_digits(mut idx: u64, t: u64, dim: usize) -> Vec<i64> {
    let mut k = vec![0i64; dim];
    for slot in k.iter_mut().rev() {
        *slot = (idx % t) as i64;
        idx /= t;
    }
    k
}

/// `T^{2g}`, or an error when it does not fit in 64 bits.
pub fn grid_size(t: u64, g: usize) -> Result<u64> {
    t.checked_pow(2 * g as u32).ok_or_else(|| Error::Validation(format!("grid T^{} for T = {t} is too large", 2 * g)))
}

/// Classifies every grid point `k/T` with flat lexicographic index in
/// `shard` (default: all `T^{2g}`), in parallel over disjoint chunks.
pub fn enumerate_rational_points(
    x: &VarietyDescriptor,
    torus: &ProductTorus,
    t: u64,
    tol: f64,
    shard: Option<Range<u64>>,
) -> Result<CountRecord> {
    if t == 0 {
        return Err(Error::Validation("T must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation("membership tolerance must be positive".into()));
    }
    let g = torus.genus();
    if x.g != g {
        return Err(Error::DimensionMismatch { expected: g, found: x.g });
    }
    let total = grid_size(t, g)?;
    let range = shard.unwrap_or(0..total);
    if range.start > range.end || range.end > total {
        return Err(Error::Validation(format!("shard {}..{} outside 0..{total}", range.start, range.end)));
    }
    let start = Instant::now();
    let tables: Vec<FactorTable> = torus.factors.iter().map(|f| factor_table(f, t)).collect::<Result<_>>()?;
    let chunks: Vec<u64> = (range.start..range.end).step_by(CHUNK as usize).collect();
    let results: Vec<Result<Vec<ClassifiedPoint>>> = chunks
        .par_iter()
        .map(|&c0| {
            let mut found = Vec::new();
            for idx in c0..(c0 + CHUNK).min(range.end) {
                let k = grid_digits(idx, t, 2 * g);
                let cell = |f: usize| (k[2 * f] as u64 * t + k[2 * f + 1] as u64) as usize;
                let m = decide_with(
                    x,
                    tol,
                    || Ok((0..g).map(|f| tables[f].low[cell(f)]).collect()),
                    || Ok((0..g).map(|f| tables[f].high[cell(f)]).collect()),
                )?;
                if m.verdict != Verdict::Out {
                    found.push(ClassifiedPoint {
                        point: RationalTorusPoint::from_grid(&k, t),
                        verdict: m.verdict,
                        residual: m.residual.is_finite().then_some(m.residual),
                    });
                }
            }
            Ok(found)
        })
        .collect();
    let mut points = Vec::new();
    for r in results {
        points.extend(r?);
    }
    Ok(CountRecord {
        t,
        n_in: points.iter().filter(|p| p.verdict == Verdict::In).count() as u64,
        n_uncertain: points.iter().filter(|p| p.verdict == Verdict::Uncertain).count() as u64,
        range: (range.start, range.end),
        total,
        points,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Splits `0..total` into `n` contiguous shards of near-equal size.
pub fn shard_plan(total: u64, n: u64) -> Vec<Range<u64>> {
    let n = n.max(1);
    (0..n).map(|i| (total * i / n)..(total * (i + 1) / n)).collect()
}

/// Merges shard records of one `T`; the shard ranges must tile `0..total`
/// exactly. The result does not depend on the order of `shards`.
pub fn merge_shards(mut shards: Vec<CountRecord>) -> Result<CountRecord> {
    let first = shards.first().ok_or_else(|| Error::ShardMerge("no shards to merge".into()))?;
    let (t, total) = (first.t, first.total);
    if let Some(bad) = shards.iter().find(|s| s.t != t || s.total != total) {
        return Err(Error::ShardMerge(format!("shard for T = {} mixed with T = {t}", bad.t)));
    }
    shards.sort_by_key(|s| s.range);
    let mut cursor = 0u64;
    for s in &shards {
        if s.range.0 != cursor {
            let what = if s.range.0 < cursor { "overlap" } else { "gap" };
            return Err(Error::ShardMerge(format!("{what} at grid index {} (expected {cursor})", s.range.0.min(cursor))));
        }
        cursor = s.range.1;
    }
    if cursor != total {
        return Err(Error::ShardMerge(format!("shards cover 0..{cursor} of 0..{total}")));
    }
    let mut points: Vec<ClassifiedPoint> = shards.iter().flat_map(|s| s.points.iter().cloned()).collect();
    points.sort_by(|a, b| a.point.cmp(&b.point));
    Ok(CountRecord {
        t,
        n_in: shards.iter().map(|s| s.n_in).sum(),
        n_uncertain: shards.iter().map(|s| s.n_uncertain).sum(),
        range: (0, total),
        total,
        points,
        seconds: shards.iter().map(|s| s.seconds).sum(),
    })
}

/// `T₁ | T₂ ⇒ n_in(T₁) ≤ n_in(T₂) + n_uncertain(T₂)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityCheck {
    pub t1: u64,
    pub t2: u64,
    pub holds: bool,
}

/// Counting records with the fitted growth exponent of `N(T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingTable {
    pub records: Vec<CountRecord>,
    /// Least-squares slope of `log N` against `log T` over `N > 0`.
    pub exponent: Option<f64>,
    /// Set when the counts do not grow: the maximum over the upper half of
    /// the range does not exceed the maximum over the lower half.
    pub degenerate: bool,
    pub divisibility: Vec<DivisibilityCheck>,
}

impl CountingTable {
    pub fn from_records(mut records: Vec<CountRecord>) -> Self {
        records.sort_by_key(|r| r.t);
        let exponent = fit_exponent(records.iter().map(|r| (r.t, r.n_in)));
        let half = records.len() / 2;
        let degenerate = records.len() >= 2 && {
            let low = records[..half].iter().map(|r| r.n_in).max().unwrap_or(0);
            let high = records[half..].iter().map(|r| r.n_in).max().unwrap_or(0);
            high <= low
        };
        let mut divisibility = Vec::new();
        for a in &records {
            for b in &records {
                if a.t < b.t && b.t % a.t == 0 {
                    divisibility.push(DivisibilityCheck { t1: a.t, t2: b.t, holds: a.n_in <= b.n_in + b.n_uncertain });
                }
            }
        }
        CountingTable { records, exponent, degenerate, divisibility }
    }

    pub fn divisibility_holds(&self) -> bool {
        self.divisibility.iter().all(|d| d.holds)
    }

    pub fn record(&self, t: u64) -> Option<&CountRecord> {
        self.records.iter().find(|r| r.t == t)
    }
}

/// Least-squares slope of `log n` against `log t` over pairs with `n > 0`;
/// `None` with fewer than two such pairs.
pub fn fit_exponent(pairs: impl IntoIterator<Item = (u64, u64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pairs.into_iter().filter(|&(t, n)| n > 0 && t > 0).map(|(t, n)| ((t as f64).ln(), (n as f64).ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// One counting record per `T`, in increasing `T`.
pub fn counting_table(x: &VarietyDescriptor, torus: &ProductTorus, t_range: &[u64], tol: f64) -> Result<CountingTable> {
    if t_range.is_empty() {
        return Err(Error::Validation("T range is empty".into()));
    }
    let mut ts = t_range.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let records = ts.iter().map(|&t| enumerate_rational_points(x, torus, t, tol, None)).collect::<Result<Vec<_>>>()?;
    Ok(CountingTable::from_records(records))
}

/// Möbius function.
pub fn mobius(mut n: u64) -> i64 {
    let mut result = 1i64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Counts of points of exact order `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOrderCount {
    #[serde(rename = "T")]
    pub t: u64,
    pub n_in: i64,
    pub n_uncertain: i64,
}

/// Exact-order counts by Möbius inversion of the dividing-`T` counts, for
/// every `T` whose divisors all have records.
pub fn exact_order_counts(records: &[CountRecord]) -> Vec<ExactOrderCount> {
    let by_t: BTreeMap<u64, &CountRecord> = records.iter().map(|r| (r.t, r)).collect();
    by_t.keys()
        .filter_map(|&t| {
            let mut n_in = 0i64;
            let mut n_unc = 0i64;
            for d in (1..=t).filter(|d| t % d == 0) {
                let r = by_t.get(&d)?;
                let mu = mobius(t / d);
                n_in += mu * r.n_in as i64;
                n_unc += mu * r.n_uncertain as i64;
            }
            Some(ExactOrderCount { t, n_in, n_uncertain: n_unc })
        })
        .collect()
}

/// CSV with columns `T,n_in,n_uncertain,seconds`.
pub fn counts_csv(records: &[CountRecord]) -> String {
    let mut s = String::from("T,n_in,n_uncertain,seconds\n");
    for r in records {
        let _ = writeln!(s, "{},{},{},{:.6}", r.t, r.n_in, r.n_uncertain, r.seconds);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniformization::tests::torus;

    #[test]
    fn grid_digits_are_lexicographic() {
        assert_eq!(grid_digits(0, 3, 2), vec![0, 0]);
        assert_eq!(grid_digits(5, 3, 2), vec![1, 2]);
        assert_eq!(grid_digits(26, 3, 3), vec![2, 2, 2]);
    }

    #[test]
    fn identity_factor_gives_square_counts() {
        let t = torus(&[("1", "i"), ("1", "2i")]);
        let spec = crate::uniformization::variety::DescriptorSpec { at_identity: vec![0], ..Default::default() };
        let x = VarietyDescriptor::from_spec(&spec, 2).unwrap();
        for n in 1..=5u64 {
            let r = enumerate_rational_points(&x, &t, n, 1e-8, None).unwrap();
            assert_eq!(r.n_in, n * n);
            assert_eq!(r.n_uncertain, 0);
        }
    }

    #[test]
    fn whole_torus_counts() {
        let t = torus(&[("1", "i"), ("1", "i")]);
        let table = counting_table(&VarietyDescriptor::whole(2), &t, &[1, 2, 3, 4], 1e-8).unwrap();
        for r in &table.records {
            assert_eq!(r.n_in, r.t.pow(4));
        }
        assert!((table.exponent.unwrap() - 4.0).abs() < 1e-12);
        assert!(table.divisibility_holds());
        assert!(!table.degenerate);
    }

    #[test]
    fn empty_real_locus() {
        // ℘'(z)^2 = 4℘^3 - g2 ℘ - g3 makes y1^2 - 4x1^3 + g2 x1 + g3 vanish
        // identically; shifting the constant by 1000 leaves no solutions.
        let t = torus(&[("1", "i"), ("1", "i")]);
        let x = VarietyDescriptor::parse(&["y1^2 - 4*x1^3 + 1000"], 2).unwrap();
        let r = enumerate_rational_points(&x, &t, 6, 1e-8, None).unwrap();
        // Brute-force oracle: the double-precision verdict at every grid point.
        let mut oracle = 0;
        for k in crate::uniformization::grid_indices(6, 4) {
            let p = RationalTorusPoint::from_grid(&k, 6);
            if crate::uniformization::membership_test(&x, &p, &t, 1e-8).unwrap() == Verdict::In {
                oracle += 1;
            }
        }
        assert_eq!(r.n_in, oracle);
    }

    #[test]
    fn shards_merge_to_the_full_record() {
        let t = torus(&[("1", "i"), ("1", "i")]);
        let x = VarietyDescriptor::parse(&["x2 - x1", "y2 - y1"], 2).unwrap();
        let full = enumerate_rational_points(&x, &t, 5, 1e-8, None).unwrap();
        let mut shards: Vec<CountRecord> =
            shard_plan(625, 7).into_iter().map(|r| enumerate_rational_points(&x, &t, 5, 1e-8, Some(r)).unwrap()).collect();
        shards.reverse();
        let merged = merge_shards(shards.clone()).unwrap();
        assert_eq!(merged.points, full.points);
        assert_eq!((merged.n_in, merged.n_uncertain), (full.n_in, full.n_uncertain));
        shards.pop();
        assert!(matches!(merge_shards(shards.clone()), Err(Error::ShardMerge(_))));
        let mut overlapping = shards.clone();
        overlapping.push(shards[0].clone());
        assert!(matches!(merge_shards(overlapping), Err(Error::ShardMerge(_))));
    }

    #[test]
    fn mobius_inversion_matches_denominators() {
        let t = torus(&[("1", "i"), ("1", "i")]);
        let x = VarietyDescriptor::parse(&["x2 - x1", "y2 - y1"], 2).unwrap();
        let table = counting_table(&x, &t, &[1, 2, 3, 4, 6], 1e-8).unwrap();
        for e in exact_order_counts(&table.records) {
            let direct = table.record(e.t).unwrap().points.iter().filter(|p| p.point.denominator() == e.t.into()).count();
            assert_eq!(e.n_in + e.n_uncertain, direct as i64, "T = {}", e.t);
        }
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(7), -1);
    }

    #[test]
    fn csv_layout() {
        let r = CountRecord { t: 3, n_in: 9, n_uncertain: 1, range: (0, 81), total: 81, points: vec![], seconds: 0.0 };
        assert_eq!(counts_csv(&[r]), "T,n_in,n_uncertain,seconds\n3,9,1,0.000000\n");
    }
}
