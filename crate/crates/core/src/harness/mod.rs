//! Experiment orchestration: configuration, Monte Carlo trials, and output
//! files.

mod config;
mod layout;
mod output;
mod run;

pub use config::{load_config, parse_config, DataKind, ExperimentConfig, FieldSpec, Layout, Rule, Scheme, SelectSpec};
pub use layout::sensing_probabilities;
pub use output::{
    ensure_dir, format_float, front_csv, manifest, metrics_csv, mse_csv, reliability_csv, write_file, write_results,
};
pub use run::{
    reliable_fraction, sensed_fraction, summarize, Decision, Experiment, RunSummary, SensorMetrics, Snapshot,
    StepRecord, TrialResult,
};
