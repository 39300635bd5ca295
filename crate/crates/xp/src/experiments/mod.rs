//! One module per catalog entry. Each experiment appends rows, criteria and plot
//! series to a [`Report`].

use std::time::Instant;

use yule_bins_core::quad::QuadratureSpec;
use yule_bins_core::rng::derive_seed;
use yule_bins_core::Result;

use crate::config::{ExperimentConfig, ExperimentId, Params};
use crate::output::Report;

mod deterministic_compare;
mod double_threshold;
mod first_empty;
mod limit_law;
mod lln;
mod mixed_poisson;
mod model_checks;
mod rare_regimes;
mod rho1_critical;
mod two_dim_pp;

pub struct Ctx<'a> {
    pub id: ExperimentId,
    pub params: &'a Params,
    pub master_seed: u64,
}

impl Ctx<'_> {
    /// Master seed of a named section; sections and experiments never share streams.
    pub fn seed(&self, section: &str) -> u64 {
        derive_seed(self.master_seed, &format!("{}/{}", self.id, section))
    }
}

pub(crate) fn quad() -> QuadratureSpec {
    QuadratureSpec::with_tolerance(1e-9)
}

/// Runs `f` and records its wall-clock time under `name`.
pub(crate) fn timed<F>(r: &mut Report, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut Report) -> Result<()>,
{
    let start = Instant::now();
    let out = f(r);
    r.timings.push((name.to_string(), start.elapsed()));
    out
}

pub(crate) fn within_sigma(estimate: f64, stderr: f64, reference: f64, z: f64) -> bool {
    (estimate - reference).abs() <= z * stderr
}

pub(crate) fn rel_err(estimate: f64, reference: f64) -> f64 {
    (estimate / reference - 1.0).abs()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let ctx = Ctx {
        id: cfg.experiment_id,
        params: &cfg.params,
        master_seed: cfg.master_seed,
    };
    let mut r = Report::new(cfg.experiment_id);
    match cfg.experiment_id {
        ExperimentId::ModelChecks => model_checks::run(&ctx, &mut r)?,
        ExperimentId::LimitLaw => limit_law::run(&ctx, &mut r)?,
        ExperimentId::TwoDimPp => two_dim_pp::run(&ctx, &mut r)?,
        ExperimentId::FirstEmpty => first_empty::run(&ctx, &mut r)?,
        ExperimentId::MixedPoisson => mixed_poisson::run(&ctx, &mut r)?,
        ExperimentId::Lln => lln::run(&ctx, &mut r)?,
        ExperimentId::DeterministicCompare => deterministic_compare::run(&ctx, &mut r)?,
        ExperimentId::RareRegimes => rare_regimes::run(&ctx, &mut r)?,
        ExperimentId::DoubleThreshold => double_threshold::run(&ctx, &mut r)?,
        ExperimentId::Rho1Critical => rho1_critical::run(&ctx, &mut r)?,
    }
    Ok(r)
}
