//! Share of the expected empty count carried by `t_⌊ρ⌋` near `δ1 log n`, and the
//! rare-event signature of the count in simulation.

use yule_bins_core::par::replicate;
use yule_bins_core::rare::{
    conditional_occupancy_experiment, expected_exp_sum, psi_ratio, windowed_exp_sum, ConditionalOccupancy, Method,
    RegimeSpec,
};
use yule_bins_core::rng::RngStream;
use yule_bins_core::yule::{bin_probabilities, sample_splits, throw_balls, ThrowMode};
use yule_bins_core::{EstimateWithCI, Interval, Result};

use super::{rel_err, timed, Ctx};
use crate::output::{At, RefSource, Report};

/// `(a, b)` of the window `[δ1 log n - a, δ1 log n + b]`.
const WINDOW: (f64, f64) = (1.0, 1.0);
const PSI_TOLERANCE: f64 = 0.03;
const INVARIANT_TOLERANCE: f64 = 1e-9;
const SIGNATURE_LEVEL: f64 = 0.05;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    for &rho in &ctx.params.rho {
        let suffix = if ctx.params.rho.len() > 1 { format!("-rho{rho}") } else { String::new() };
        timed(r, &format!("A8{suffix}"), |r| psi(ctx, r, rho, &suffix))?;
        timed(r, &format!("signature{suffix}"), |r| signature(ctx, r, rho, &suffix))?;
        timed(r, &format!("conditioned-simulation{suffix}"), |r| conditioned_simulation(ctx, r, rho, &suffix))?;
    }
    Ok(())
}

fn delta1(ctx: &Ctx, rho: f64) -> f64 {
    let alpha = ctx.params.alpha.expect("validated");
    RegimeSpec { rho, alpha, delta: 0.0, a_shift: 0.0, x: ctx.params.x_grid[0] }.delta1()
}

fn window(n: f64, d1: f64) -> Result<Interval> {
    let c = d1 * n.ln();
    Interval::new(c - WINDOW.0, c + WINDOW.1)
}

fn k_max(n: f64, alpha: f64, x: f64) -> usize {
    (x * n.powf(alpha)).floor() as usize
}

fn psi(ctx: &Ctx, r: &mut Report, rho: f64, suffix: &str) -> Result<()> {
    let alpha = ctx.params.alpha.expect("validated");
    let x = ctx.params.x_grid[0];
    let d1 = delta1(ctx, rho);
    let n_max = ctx.params.n_grid.iter().copied().fold(0.0, f64::max);
    let (a, b) = WINDOW;
    let reference = psi_ratio(-a, b, rho, x)?;
    let mut plot = Vec::new();
    for &n in &ctx.params.n_grid {
        let k = k_max(n, alpha, x);
        let full = expected_exp_sum(n, k, rho, Method::Quadrature)?;
        let cond = windowed_exp_sum(n, k, rho, window(n, d1)?, Method::Quadrature)?;
        let ratio = cond.value / full.value;
        let rel = rel_err(ratio, reference);
        let pass = rel <= PSI_TOLERANCE;
        let at = At::default().rho(rho).n(n).alpha(alpha).delta(d1).x(x);
        r.row("psi-ratio", at, ratio, None, reference, RefSource::Quadrature, pass);
        plot.push(vec![n, ratio, reference]);
        if n == n_max {
            r.criterion(format!("A8-psi-ratio{suffix}"), pass, ratio, reference, PSI_TOLERANCE);
        }
    }
    r.plot(&format!("psi_ratio_vs_n{suffix}"), &["n", "ratio", "psi"], plot);

    let split = psi_ratio(-a, 0.0, rho, x)? + psi_ratio(0.0, b, rho, x)?;
    let add_err = (split - reference).abs();
    let at = At::default().rho(rho).x(x);
    r.row("psi-additivity", at, split, None, reference, RefSource::Quadrature, add_err <= INVARIANT_TOLERANCE);
    r.criterion(format!("A8-psi-additivity{suffix}"), add_err <= INVARIANT_TOLERANCE, add_err, 0.0, INVARIANT_TOLERANCE);
    let total = psi_ratio(f64::NEG_INFINITY, -a, rho, x)? + reference + psi_ratio(b, f64::INFINITY, rho, x)?;
    let tot_err = (total - 1.0).abs();
    r.row("psi-total", at, total, None, 1.0, RefSource::ClosedForm, tot_err <= INVARIANT_TOLERANCE);
    r.criterion(format!("A8-psi-total{suffix}"), tot_err <= INVARIANT_TOLERANCE, tot_err, 0.0, INVARIANT_TOLERANCE);
    Ok(())
}

/// The expected count is carried by rare realizations: most have no empty bin at all.
fn signature(ctx: &Ctx, r: &mut Report, rho: f64, suffix: &str) -> Result<()> {
    let alpha = ctx.params.alpha.expect("validated");
    let x = ctx.params.x_grid[0];
    let n = ctx.params.n_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let k = k_max(n, alpha, x);
    let seed = ctx.seed(&format!("signature-rho{rho}"));
    let counts = replicate(ctx.params.replications, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let splits = sample_splits(k, &mut rng).expect("positive length");
        let pv = bin_probabilities(&splits, rho).expect("rho validated");
        throw_balls(&pv, n as u64, ThrowMode::Poissonized, &mut rng).level_count_upto(0, k) as f64
    });
    let hits: Vec<f64> = counts.iter().map(|&c| if c > 0.0 { 1.0 } else { 0.0 }).collect();
    let p = EstimateWithCI::from_samples(&hits, seed, "mc");
    let mean = EstimateWithCI::from_samples(&counts, seed, "mc");
    let quad = expected_exp_sum(n, k, rho, Method::Quadrature)?;
    let at = At::default().rho(rho).n(n).alpha(alpha).x(x);
    let pass = p.value < SIGNATURE_LEVEL;
    r.row("probability-any-empty", at, p.value, Some(p.stderr), SIGNATURE_LEVEL, RefSource::PaperFormula, pass);
    r.row("simulated-mean-count", at, mean.value, Some(mean.stderr), quad.value, RefSource::Quadrature, true);
    r.criterion(format!("rare-event-signature{suffix}"), pass, p.value, 0.0, SIGNATURE_LEVEL);
    Ok(())
}

/// Poissonized simulation with `t_⌊ρ⌋` drawn inside the window, against quadrature.
fn conditioned_simulation(ctx: &Ctx, r: &mut Report, rho: f64, suffix: &str) -> Result<()> {
    let alpha = ctx.params.alpha.expect("validated");
    let x = ctx.params.x_grid[0];
    let n = ctx.params.n_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let w = window(n, delta1(ctx, rho))?;
    let cfg = ConditionalOccupancy {
        n: n as u64,
        rho,
        alpha,
        x,
        window: w,
        replications: ctx.params.replications,
        seed: ctx.seed(&format!("conditioned-simulation-rho{rho}")),
    };
    let est = conditional_occupancy_experiment(&cfg)?;
    let quad = windowed_exp_sum(n, k_max(n, alpha, x), rho, w, Method::Quadrature)?;
    let tol = 3.0 * est.stderr + quad.error_estimate;
    let pass = (est.value - quad.value).abs() <= tol;
    r.row("conditioned-simulation", At::default().rho(rho).n(n).alpha(alpha).x(x), est.value, Some(est.stderr), quad.value, RefSource::Quadrature, pass);
    r.criterion(format!("conditioned-simulation{suffix}"), pass, est.value, quad.value, tol);
    Ok(())
}
