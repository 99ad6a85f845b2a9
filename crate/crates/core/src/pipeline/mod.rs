//! Scenario orchestration: coset detection, off-coset counting, orbit
//! bounds, the crossover order and report emission.

pub mod config;
pub mod cosets;
pub mod report;

pub use config::{CosetSearch, OutputFormat, OutputSpec, ScenarioConfig, TRange};
pub use cosets::{detect_torus_cosets, findings_are_full_complex, on_any_coset, CosetEvidence, CosetFinding};
pub use report::{count_sharded, crossover, emit_report, run_pipeline, PipelineReport, RawCount};
