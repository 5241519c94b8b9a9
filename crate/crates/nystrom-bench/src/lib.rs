//! Benchmark harness for sketch-based fixed-rank psd approximation:
//! experiment configuration, the trial runner, and CSV output.

pub mod config;
pub mod csvout;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, MatrixSource, Method};
pub use csvout::{emit_csv, parse_csv, records_to_csv, CSV_HEADER};
pub use runner::{golden_preset, run_experiment, stability_preset, TrialRecord};
