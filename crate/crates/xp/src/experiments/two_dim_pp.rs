//! Rectangle statistics of the two-dimensional process `(i / n^{1/(ρ+2)}, n P_i)`.

use yule_bins_core::geometry::Rect;
use yule_bins_core::limits::{laplace_functional_limit, rect_intensity_mass};
use yule_bins_core::par::replicate;
use yule_bins_core::ppstats::empirical_laplace_functional;
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::gamma;
use yule_bins_core::yule::{bin_probabilities, distribution_truncation, sample_splits, two_dim_process};
use yule_bins_core::{EstimateWithCI, Result};

use super::{quad, timed, within_sigma, Ctx};
use crate::output::{At, RefSource, Report};

const THETA: f64 = 1.0;
const HEIGHT: f64 = 1.0;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "rectangles", |r| rectangles(ctx, r))
}

fn rectangles(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let n = ctx.params.n_grid[0] as u64;
    let reps = ctx.params.replications;
    let x_max = ctx.params.x_grid.iter().copied().fold(0.0, f64::max);
    let spec = quad();
    let mut laplace_ok = true;
    let mut worst_laplace = 0.0f64;
    let mut mean_ok = true;
    let mut worst_mean = 0.0f64;
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        let seed = ctx.seed(&format!("rho-{ri}"));
        let n_bins = distribution_truncation(n, rho, x_max);
        let processes = replicate(reps, |j| {
            let mut rng = RngStream::new(seed, j).rng();
            let splits = sample_splits(n_bins, &mut rng).expect("positive length");
            let pv = bin_probabilities(&splits, rho).expect("rho validated");
            two_dim_process(&pv, n).expect("Yule vector")
        });
        for &x in &ctx.params.x_grid {
            let rect = Rect::origin(x, HEIGHT);
            let at = At::default().rho(rho).n(n as f64).x(x);
            let est = empirical_laplace_functional(&processes, &rect, THETA, seed)?;
            let reference = laplace_functional_limit(&rect, THETA, rho, &spec)?;
            let pass = within_sigma(est.value, est.stderr, reference, 3.0);
            laplace_ok &= pass;
            worst_laplace = worst_laplace.max(est.z_score(reference).abs());
            r.row("laplace-functional", at, est.value, Some(est.stderr), reference, RefSource::Quadrature, pass);

            if rho < 1.0 {
                let counts: Vec<f64> = processes.iter().map(|p| p.count_in_rect(&rect) as f64).collect();
                let est = EstimateWithCI::from_samples(&counts, seed, "mc");
                // E W^{-ρ} = Γ(1-ρ) for W ~ Exp(1)
                let reference = gamma(1.0 - rho) * rect_intensity_mass(&rect, rho);
                let pass = within_sigma(est.value, est.stderr, reference, 3.0);
                mean_ok &= pass;
                worst_mean = worst_mean.max(est.z_score(reference).abs());
                r.row("rectangle-mean-count", at, est.value, Some(est.stderr), reference, RefSource::ClosedForm, pass);
            }
        }
    }
    r.criterion("laplace-rectangle", laplace_ok, worst_laplace, 0.0, 3.0);
    if ctx.params.rho.iter().any(|&rho| rho < 1.0) {
        r.criterion("rectangle-mean", mean_ok, worst_mean, 0.0, 3.0);
    }
    Ok(())
}
