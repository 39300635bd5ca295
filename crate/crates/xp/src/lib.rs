//! Experiment runner for the Yule bins-and-balls model.
//!
//! An experiment is selected by id from the [`catalog`], configured from a flat JSON
//! file, run on the core crate and written out as `results.csv`, `summary.json` and
//! `plotdata/*.csv`.

pub mod catalog;
pub mod config;
pub mod experiments;
pub mod output;
pub mod self_test;

use std::io;

pub use config::{ConfigError, ExperimentConfig, ExperimentId};
pub use output::Report;

use yule_bins_core::par::with_threads;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] yule_bins_core::Error),
    #[error("writing outputs: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// 2 for invalid configuration, 3 for truncation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use yule_bins_core::Error as E;
        match self {
            RunError::Config(_) | RunError::Model(E::InvalidArgument(_)) => 2,
            RunError::Model(E::NoEmptyBin { .. }) => 3,
            _ => 1,
        }
    }
}

/// Runs one experiment on `threads` workers (`None` for the default pool).
pub fn run_in_memory(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Report, RunError> {
    Ok(with_threads(threads, || experiments::run_experiment(cfg))?)
}

/// Runs one experiment and writes its outputs under `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Report, RunError> {
    let report = run_in_memory(cfg, threads)?;
    report.write_all(&cfg.output_dir)?;
    Ok(report)
}
