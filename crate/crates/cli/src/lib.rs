//! Experiment harness for `dts-core`: configuration, batch runs over seeds
//! and policies, and the files each run leaves behind.

pub mod config;
mod error;
pub mod experiment;

pub use config::{parse_config, CliArgs, ExperimentConfig, InstanceSpec, RawConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, summarize, Aggregate, ExperimentOutcome, RunSummary};
