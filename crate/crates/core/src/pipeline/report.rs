//! The counting-versus-orbit comparison and its report artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counting::{
    counts_csv, default_primes, enumerate_rational_points, exact_order_counts, merge_shards, orbits_csv, product_orbit_bound, shard_plan,
    CountRecord, CountingTable, ExactOrderCount, OrbitBoundRecord,
};
use crate::uniformization::{CurveModel, ProductTorus, VarietyDescriptor};
use crate::{Error, Result};

use super::config::{OutputFormat, ScenarioConfig};
use super::cosets::{detect_torus_cosets, findings_are_full_complex, on_any_coset, CosetFinding};

/// Counts before coset exclusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCount {
    #[serde(rename = "T")]
    pub t: u64,
    pub n_in: u64,
    pub n_uncertain: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: ScenarioConfig,
    pub versions: BTreeMap<String, String>,
    pub cosets: Vec<CosetFinding>,
    pub cosets_full_complex: bool,
    pub raw_counts: Vec<RawCount>,
    /// Counts off the detected cosets.
    pub counting: CountingTable,
    pub exact_order: Vec<ExactOrderCount>,
    pub orbits: Vec<OrbitBoundRecord>,
    /// Least tested `T` beyond which the orbit bound exceeds the exact-order
    /// count at every tested `T' ≥ T`.
    pub crossover: Option<u64>,
    /// No `IN` or `UNCERTAIN` point of exact order `T ≥ T*` off the cosets.
    pub counts_stabilize: bool,
    pub orbits_nondecreasing: bool,
}

/// Counts one `T` over the configured shard plan.
pub fn count_sharded(x: &VarietyDescriptor, torus: &ProductTorus, t: u64, tol: f64, shards: u64) -> Result<CountRecord> {
    if shards <= 1 {
        return enumerate_rational_points(x, torus, t, tol, None);
    }
    let total = crate::counting::enumerate::grid_size(t, torus.genus())?;
    let parts = shard_plan(total, shards)
        .into_iter()
        .map(|r| enumerate_rational_points(x, torus, t, tol, Some(r)))
        .collect::<Result<Vec<_>>>()?;
    merge_shards(parts)
}

/// Least `T` in `ts` with `bound(T') > count(T')` for every tested `T' ≥ T`.
pub fn crossover(ts: &[u64], bound: &BTreeMap<u64, u64>, count: &BTreeMap<u64, i64>) -> Option<u64> {
    let mut sorted = ts.to_vec();
    sorted.sort_unstable();
    let mut best = None;
    for &t in sorted.iter().rev() {
        let (Some(&b), Some(&n)) = (bound.get(&t), count.get(&t)) else { break };
        if (b as i64) > n {
            best = Some(t);
        } else {
            break;
        }
    }
    best
}

fn curve_models(torus: &ProductTorus) -> Result<Vec<CurveModel>> {
    torus
        .factors
        .iter()
        .enumerate()
        .map(|(k, f)| f.spec.model.clone().ok_or_else(|| Error::Validation(format!("factor {} has no curve model for the orbit bounds", k + 1))))
        .collect()
}

/// Coset detection, off-coset counting, orbit bounds and the crossover.
pub fn run_pipeline(config: &ScenarioConfig) -> Result<PipelineReport> {
    config.validate()?;
    let (torus, x) = config.build()?;
    let models = curve_models(&torus)?;
    let ts = config.t_range.values();

    let cosets = detect_torus_cosets(&x, &torus, &config.coset_search, config.tol, config.seed).map_err(|e| e.in_stage("cosets"))?;
    let cosets_full_complex = findings_are_full_complex(&cosets, &torus).map_err(|e| e.in_stage("cosets"))?;

    let mut raw_counts = Vec::new();
    let mut records = Vec::new();
    for &t in &ts {
        let mut rec = count_sharded(&x, &torus, t, config.tol, config.shards).map_err(|e| e.in_stage("counting"))?;
        if !config.record_timings {
            rec.seconds = 0.0;
        }
        raw_counts.push(RawCount { t, n_in: rec.n_in, n_uncertain: rec.n_uncertain });
        let mut on_coset = BTreeSet::new();
        for p in &rec.points {
            if on_any_coset(&cosets, &p.point).map_err(|e| e.in_stage("counting"))? {
                on_coset.insert(p.point.clone());
            }
        }
        records.push(rec.filtered(|p| !on_coset.contains(p)));
    }
    let counting = CountingTable::from_records(records);
    let exact_order = exact_order_counts(&counting.records);

    let primes = config.primes.clone().unwrap_or_else(default_primes);
    let orbits = ts.iter().map(|&t| product_orbit_bound(&models, t, &primes)).collect::<Result<Vec<_>>>().map_err(|e| e.in_stage("orbits"))?;

    let bound: BTreeMap<u64, u64> = orbits.iter().map(|o| (o.t, o.lower_bound)).collect();
    let exact: BTreeMap<u64, i64> = exact_order.iter().map(|e| (e.t, e.n_in + e.n_uncertain)).collect();
    // Without every divisor in range the dividing-T count is the safe upper bound.
    let count: BTreeMap<u64, i64> =
        counting.records.iter().map(|r| (r.t, exact.get(&r.t).copied().unwrap_or((r.n_in + r.n_uncertain) as i64))).collect();
    let crossover = crossover(&ts, &bound, &count);
    let counts_stabilize = crossover.is_some_and(|ts| count.iter().filter(|(t, _)| **t >= ts).all(|(_, n)| *n == 0));
    let orbits_nondecreasing = orbits.windows(2).all(|w| w[0].lower_bound <= w[1].lower_bound);

    let versions = BTreeMap::from([("torsion-lab".to_string(), env!("CARGO_PKG_VERSION").to_string())]);
    Ok(PipelineReport {
        config: config.clone(),
        versions,
        cosets,
        cosets_full_complex,
        raw_counts,
        counting,
        exact_order,
        orbits,
        crossover,
        counts_stabilize,
        orbits_nondecreasing,
    })
}

/// Two-column `ln T ln v` rows for the positive values.
fn dat(rows: impl IntoIterator<Item = (u64, u64)>, label: &str) -> String {
    let mut s = format!("# ln(T) ln({label})\n");
    for (t, v) in rows {
        if v > 0 {
            let _ = writeln!(s, "{:.12e} {:.12e}", (t as f64).ln(), (v as f64).ln());
        }
    }
    s
}

fn write(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    written.push(path);
    Ok(())
}

/// Writes `report.json` (json) and `counts.csv`, `orbits.csv`, `counts.dat`,
/// `orbits.dat` (csv) into `dir`; returns the written paths.
pub fn emit_report(report: &PipelineReport, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();
    if format.json() {
        let body = serde_json::to_string_pretty(report).map_err(|e| Error::Validation(format!("report serialization: {e}")))? + "\n";
        write(dir, "report.json", &body, &mut written)?;
    }
    if format.csv() {
        write(dir, "counts.csv", &counts_csv(&report.counting.records), &mut written)?;
        write(dir, "orbits.csv", &orbits_csv(&report.orbits), &mut written)?;
        write(dir, "counts.dat", &dat(report.counting.records.iter().map(|r| (r.t, r.n_in)), "N"), &mut written)?;
        write(dir, "orbits.dat", &dat(report.orbits.iter().map(|o| (o.t, o.lower_bound)), "orbit bound"), &mut written)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_is_a_suffix_property() {
        let ts = [1, 2, 3, 4, 5];
        let bound = BTreeMap::from([(1, 1), (2, 1), (3, 4), (4, 2), (5, 4)]);
        let count = BTreeMap::from([(1, 1), (2, 6), (3, 0), (4, 0), (5, 0)]);
        assert_eq!(crossover(&ts, &bound, &count), Some(3));
        let count = BTreeMap::from([(1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]);
        assert_eq!(crossover(&ts, &bound, &count), Some(1));
        let count = BTreeMap::from([(1, 0), (2, 0), (3, 0), (4, 0), (5, 9)]);
        assert_eq!(crossover(&ts, &bound, &count), None);
    }

    #[test]
    fn dat_skips_zero_counts() {
        assert_eq!(dat([(1, 0), (2, 1)], "N"), format!("# ln(T) ln(N)\n{:.12e} {:.12e}\n", 2f64.ln(), 0.0));
    }
}
