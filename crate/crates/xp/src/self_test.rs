//! Quick checks of the statistical machinery itself.

use rand_distr::{Distribution, Exp1};
use yule_bins_core::par::{replicate_parallel, replicate_sequential, with_threads};
use yule_bins_core::ppstats::{ks_test, ReplicatedSamples};
use yule_bins_core::quad::{integrate, integrate_with_breaks, QuadratureSpec};
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::gamma;
use yule_bins_core::EstimateWithCI;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::experiments::run_experiment;

const SEED: u64 = 2026;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn exp_draws(seed: u64, count: usize) -> Vec<f64> {
    replicate_sequential(count, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        Exp1.sample(&mut rng)
    })
}

/// Standard errors shrink by `√2` per doubling of the replication count.
fn stderr_scaling() -> Check {
    let sizes = [1_000usize, 2_000, 4_000, 8_000, 16_000];
    let draws = exp_draws(SEED, *sizes.last().unwrap());
    let se: Vec<f64> = sizes
        .iter()
        .map(|&m| EstimateWithCI::from_samples(&draws[..m], SEED, "mc").stderr)
        .collect();
    let ratios: Vec<f64> = se.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|r| (r - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1);
    Check {
        name: "stderr-scaling",
        pass,
        detail: format!("ratios {ratios:.3?}, expected 0.707"),
    }
}

fn quadrature() -> Check {
    let spec = QuadratureSpec::with_tolerance(1e-11);
    let mut worst = 0.0f64;
    for s in [0.5, 1.5, 3.0, 7.25] {
        let v = integrate_with_breaks(|x: f64| x.powf(s - 1.0) * (-x).exp(), &[0.0, 1.0, f64::INFINITY], &spec)
            .map(|i| i.value)
            .unwrap_or(f64::NAN);
        worst = worst.max((v / gamma(s) - 1.0).abs());
    }
    let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &spec)
        .map(|i| i.value)
        .unwrap_or(f64::NAN);
    worst = worst.max((v - 2.0).abs());
    Check {
        name: "quadrature",
        pass: worst < 1e-9,
        detail: format!("worst relative error {worst:.2e}"),
    }
}

fn ks_null() -> Check {
    let draws = exp_draws(SEED ^ 1, 10_000);
    let cdf = |x: f64| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() };
    match ReplicatedSamples::new(draws, SEED).and_then(|s| ks_test(&s, cdf, "exp")) {
        Ok(g) => Check {
            name: "ks-null",
            pass: g.p_value > 0.01,
            detail: format!("p = {:.3}", g.p_value),
        },
        Err(e) => Check {
            name: "ks-null",
            pass: false,
            detail: e.to_string(),
        },
    }
}

/// Identical draws from the sequential and parallel paths and across thread counts.
fn determinism() -> Check {
    let f = |j: u64| {
        let mut rng = RngStream::new(SEED, j).rng();
        let e: f64 = Exp1.sample(&mut rng);
        e
    };
    let seq = replicate_sequential(4096, f);
    let par = replicate_parallel(4096, f);
    let mut cfg = ExperimentConfig::defaults(ExperimentId::TwoDimPp);
    cfg.params.n_grid = vec![1e4];
    cfg.params.replications = 200;
    let one = with_threads(Some(1), || run_experiment(&cfg)).map(|r| r.rows);
    let four = with_threads(Some(4), || run_experiment(&cfg)).map(|r| r.rows);
    let pass = seq == par && one.is_ok() && one == four;
    Check {
        name: "determinism",
        pass,
        detail: format!("sequential == parallel: {}, 1 thread == 4 threads: {}", seq == par, one == four),
    }
}

pub fn run_self_test() -> Vec<Check> {
    vec![stderr_scaling(), quadrature(), ks_null(), determinism()]
}
