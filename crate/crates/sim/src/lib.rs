//! Monte Carlo harness for sliding window superposition coding.
//!
//! The harness turns an [`ExperimentConfig`] into result rows: it builds the
//! codes once, runs independent seeded trials on a worker pool, and reduces
//! the per-trial outcomes in trial order so that results never depend on the
//! number of workers.

pub mod channel_file;
pub mod config;
pub mod output;
pub mod runner;
pub mod sweep;

pub use config::{ChannelSpec, CodeRate, ExperimentConfig, Scheme};
pub use output::{emit_results, write_results_csv};
pub use runner::{run_experiment, ResultRow};
pub use sweep::{run_sweep, SweepParam};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("channel file line {line}: {msg}")]
    ChannelFile { line: u64, msg: String },
    #[error(transparent)]
    Core(#[from] swsc_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("cannot parse configuration: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
