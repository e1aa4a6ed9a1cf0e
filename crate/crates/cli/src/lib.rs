//! Reproducible experiment scenarios over `umet-core`.

pub mod config;
pub mod output;
pub mod scenarios;

pub use config::{ConfigError, ExperimentConfig, Scenario};
pub use scenarios::{describe, output_dir, run, run_with_env, validate, RunOutcome};
