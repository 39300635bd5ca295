//! Law of large numbers at `κ > 1/(ρ+2)`.

use yule_bins_core::limits::rect_intensity_mass;
use yule_bins_core::par::replicate;
use yule_bins_core::ppstats::lln_functional;
use yule_bins_core::quad::integrate_with_breaks;
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::{gamma, gamma_p};
use yule_bins_core::yule::{bin_probabilities, sample_splits};
use yule_bins_core::{EstimateWithCI, Rect, Result};

use super::{quad, rel_err, timed, Ctx};
use crate::output::{At, RefSource, Report};

const THETA: f64 = 1.0;
const MIN_BINS: usize = 10_000;
const TOLERANCE: f64 = 0.10;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "lln", |r| scaled_counts(ctx, r))
}

/// Limit of the same statistic at `κ = 1/(ρ+1)`, where `P(nP_i <= y)` stays of order one:
/// `E[W^ρ ∫_0^x (1 - exp(-y s^{ρ+1} / (ρ W^ρ))) ds]`.
fn boundary_limit(rect: &Rect, rho: f64) -> Result<f64> {
    let p = rho + 1.0;
    let (x, h) = (rect.x1, rect.y1);
    let a = 1.0 / p;
    let inner = |w: f64| {
        let c = h / (rho * w.powf(rho));
        x - a * c.powf(-a) * gamma(a) * gamma_p(a, c * x.powf(p))
    };
    let spec = quad().exp_substitution();
    Ok(integrate_with_breaks(|w: f64| w.powf(rho) * inner(w) * (-w).exp(), &[0.0, 1.0, f64::INFINITY], &spec)?.value)
}

fn scaled_counts(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let kappa = ctx.params.alpha.expect("validated");
    let n_max = ctx.params.n_grid.iter().copied().fold(0.0, f64::max);
    let mut ok = true;
    let mut worst = 0.0f64;
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        for (xi, &x) in ctx.params.x_grid.iter().enumerate() {
            let rect = Rect::origin(x, 1.0);
            let reference = THETA * rect_intensity_mass(&rect, rho);
            let mut trend = Vec::new();
            for (ni, &nf) in ctx.params.n_grid.iter().enumerate() {
                let n = nf as u64;
                let n_bins = ((x * nf.powf(kappa)).ceil() as usize).max(MIN_BINS);
                let seed = ctx.seed(&format!("{ri}-{xi}-{ni}"));
                // the limit holds given W; multiplying by W^ρ removes the mixing
                let vals = replicate(ctx.params.replications, |j| {
                    let mut rng = RngStream::new(seed, j).rng();
                    let splits = sample_splits(n_bins, &mut rng).expect("positive length");
                    let pv = bin_probabilities(&splits, rho).expect("rho validated");
                    let w = splits.w_surrogate();
                    lln_functional(&pv, n, kappa, &rect, THETA).map(|s| s * w.powf(rho))
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                let est = EstimateWithCI::from_samples(&vals, seed, "mc");
                let rel = rel_err(est.value, reference);
                let pass = rel <= TOLERANCE;
                if nf == n_max {
                    ok &= pass;
                    worst = worst.max(rel);
                }
                let at = At::default().rho(rho).n(nf).alpha(kappa).x(x);
                r.row("lln-scaled-count", at, est.value, Some(est.stderr), reference, RefSource::ClosedForm, pass);
                trend.push(vec![nf, est.value, est.stderr, reference]);
            }
            if (kappa * (rho + 1.0) - 1.0).abs() < 1e-12 {
                let limit = boundary_limit(&rect, rho)?;
                let (&nf, est) = trend.last().map(|t| (&t[0], t[1])).expect("non-empty grid");
                let rel = rel_err(est, limit);
                let at = At::default().rho(rho).n(nf).alpha(kappa).x(x);
                r.row("lln-boundary-limit", at, est, Some(trend.last().unwrap()[2]), limit, RefSource::Quadrature, rel <= TOLERANCE);
                r.criterion("lln-boundary-limit", rel <= TOLERANCE, rel, 0.0, TOLERANCE);
            }
            r.plot(&format!("lln_trend_rho{rho}_x{x}"), &["n", "estimate", "stderr", "limit"], trend);
        }
    }
    r.criterion("lln-max-n", ok, worst, 0.0, TOLERANCE);
    Ok(())
}
