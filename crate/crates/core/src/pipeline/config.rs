//! Scenario configuration: the torus, the variety and every knob of a run.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::uniformization::variety::DescriptorSpec;
use crate::uniformization::{ProductTorus, TorusSpec, VarietyDescriptor};
use crate::{Error, Result};

/// Inclusive range of denominators `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TRange {
    pub min: u64,
    pub max: u64,
}

impl TRange {
    pub fn values(&self) -> Vec<u64> {
        (self.min..=self.max).collect()
    }
}

/// Bounds of the coset search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CosetSearch {
    /// Largest absolute lattice coordinate of a candidate line.
    pub height: i64,
    /// Largest complex dimension of a candidate coset.
    pub max_dim: usize,
    /// Samples certifying one candidate.
    pub samples: usize,
    /// Base points are the `IN` grid points with denominator at most this.
    pub base_t: u64,
    /// Cap on the number of base points.
    pub max_bases: usize,
}

impl Default for CosetSearch {
    fn default() -> Self {
        CosetSearch { height: 2, max_dim: 1, samples: 12, base_t: 3, max_bases: 24 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(Error::Validation(format!("unknown format '{other}' (expected json, csv or both)"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
            OutputFormat::Both => "both",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub format: OutputFormat,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_shards() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub torus: TorusSpec,
    pub variety: DescriptorSpec,
    pub t_range: TRange,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// Number of index shards per `T`.
    #[serde(default = "default_shards")]
    pub shards: u64,
    #[serde(default)]
    pub coset_search: CosetSearch,
    /// Primes for the orbit bounds; the default list when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u64>>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Records wall-clock seconds; off by default so reports are byte-stable.
    #[serde(default)]
    pub record_timings: bool,
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: ScenarioConfig = serde_json::from_str(s).map_err(|e| Error::Validation(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_json(&s)
    }

    /// Checks the scalar fields and that the torus and variety build.
    pub fn validate(&self) -> Result<()> {
        if self.t_range.min == 0 || self.t_range.min > self.t_range.max {
            return Err(Error::Validation(format!("T range {}..={} is empty or starts at 0", self.t_range.min, self.t_range.max)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation("tolerance must be positive".into()));
        }
        if self.shards == 0 {
            return Err(Error::Validation("shard count must be positive".into()));
        }
        let s = &self.coset_search;
        if s.height < 0 || s.samples == 0 || s.base_t == 0 {
            return Err(Error::Validation("coset search needs height >= 0, samples >= 1 and base_t >= 1".into()));
        }
        if let Some(p) = &self.primes {
            if p.is_empty() {
                return Err(Error::Validation("prime list is empty".into()));
            }
        }
        self.build().map(|_| ())
    }

    pub fn build(&self) -> Result<(ProductTorus, VarietyDescriptor)> {
        let torus = ProductTorus::new(&self.torus)?;
        let x = VarietyDescriptor::from_spec(&self.variety, torus.genus())?;
        Ok((torus, x))
    }
}
