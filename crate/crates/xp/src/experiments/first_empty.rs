//! First empty bin and the rate of the empty-bin process at scale `n^{1/(ρ+2)}`.

use yule_bins_core::error::Error;
use yule_bins_core::estimate::mean_var;
use yule_bins_core::limits::nu_survival_limit;
use yule_bins_core::par::replicate;
use yule_bins_core::rng::RngStream;
use yule_bins_core::yule::{
    bin_probabilities, distribution_truncation, empty_bin_process, first_empty_index, sample_splits, throw_balls,
    ScaleDescriptor, ThrowMode,
};
use yule_bins_core::{Interval, Result};

use super::{quad, timed, Ctx};
use crate::output::{At, RefSource, Report};

/// Enough bins for a usable `W_∞` surrogate.
const MIN_BINS: usize = 10_000;
const DECILES: usize = 10;
const SURVIVAL_POINTS: usize = 60;

struct Replication {
    /// `ν_n / φ(n)`, infinite when no bin within the truncation is empty.
    nu: f64,
    w: f64,
    /// Empty bins in `[0, x]` for each `x` of the grid.
    counts: Vec<usize>,
}

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    for &rho in &ctx.params.rho {
        let suffix = if ctx.params.rho.len() > 1 { format!("-rho{rho}") } else { String::new() };
        let mut reps = Vec::new();
        timed(r, &format!("simulate{suffix}"), |r| {
            reps = simulate(ctx, rho)?;
            r.truncated |= reps.iter().any(|x| x.nu.is_infinite());
            Ok(())
        })?;
        timed(r, &format!("A3{suffix}"), |r| survival(ctx, r, rho, &reps, &suffix))?;
        timed(r, &format!("A4{suffix}"), |r| rate(ctx, r, rho, &reps, &suffix))?;
    }
    Ok(())
}

fn simulate(ctx: &Ctx, rho: f64) -> Result<Vec<Replication>> {
    let n = ctx.params.n_grid[0] as u64;
    let x_max = ctx.params.x_grid.iter().copied().fold(0.0, f64::max);
    let n_bins = distribution_truncation(n, rho, x_max).max(MIN_BINS);
    let scale = ScaleDescriptor::power(n, 1.0 / (rho + 2.0));
    let seed = ctx.seed(&format!("simulate-rho{rho}"));
    let windows = ctx
        .params
        .x_grid
        .iter()
        .map(|&x| Interval::new(0.0, x))
        .collect::<Result<Vec<_>>>()?;
    let out = replicate(ctx.params.replications, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let splits = sample_splits(n_bins, &mut rng).expect("positive length");
        let pv = bin_probabilities(&splits, rho).expect("rho validated");
        let occ = throw_balls(&pv, n, ThrowMode::Poissonized, &mut rng);
        let nu = match first_empty_index(&occ) {
            Ok(i) => scale.map(i),
            Err(Error::NoEmptyBin { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let pp = empty_bin_process(&occ, 0, scale)?;
        Ok(Replication {
            nu,
            w: splits.w_surrogate(),
            counts: windows.iter().map(|w| pp.count_in(w)).collect(),
        })
    });
    out.into_iter().collect()
}

fn survival(ctx: &Ctx, r: &mut Report, rho: f64, reps: &[Replication], suffix: &str) -> Result<()> {
    let spec = quad();
    let n = ctx.params.n_grid[0];
    let m = reps.len() as f64;
    let emp = |x: f64| reps.iter().filter(|s| s.nu >= x).count() as f64 / m;
    for &x in &ctx.params.x_grid {
        let p = emp(x);
        let reference = nu_survival_limit(x, rho, &spec)?;
        let sigma = (reference * (1.0 - reference) / m).sqrt();
        let pass = (p - reference).abs() <= 3.0 * sigma;
        r.row("first-empty-survival", At::default().rho(rho).n(n).x(x), p, Some(sigma), reference, RefSource::Quadrature, pass);
        r.criterion(format!("A3-x{x}{suffix}"), pass, p, reference, 3.0 * sigma);
    }
    let x_top = 1.5 * ctx.params.x_grid.iter().copied().fold(0.0, f64::max);
    let rows = (1..=SURVIVAL_POINTS)
        .map(|k| {
            let x = x_top * k as f64 / SURVIVAL_POINTS as f64;
            Ok(vec![x, emp(x), nu_survival_limit(x, rho, &spec)?])
        })
        .collect::<Result<Vec<_>>>()?;
    r.plot(&format!("first_empty_survival{suffix}"), &["x", "empirical", "limit"], rows);
    Ok(())
}

/// Ratio estimate `mean(C) / mean(Y)` with its delta-method standard error.
fn ratio_estimate(c: &[f64], y: &[f64]) -> (f64, f64) {
    let m = c.len() as f64;
    let (mc, _) = mean_var(c);
    let (my, _) = mean_var(y);
    let lam = mc / my;
    let resid: Vec<f64> = c.iter().zip(y).map(|(a, b)| a - lam * b).collect();
    let (_, vr) = mean_var(&resid);
    (lam, (vr / m).sqrt() / my)
}

/// Rate `λ` in `E[C | W] = λ x^{ρ+2} W^{-ρ}`, fitted within deciles of `W` and pooled
/// by inverse variance.
fn rate(ctx: &Ctx, r: &mut Report, rho: f64, reps: &[Replication], suffix: &str) -> Result<()> {
    let n = ctx.params.n_grid[0];
    let laplace_rate = 1.0 / (rho * (rho + 2.0));
    let printed_rate = (rho * (rho + 2.0)).powf(-1.0 / (rho + 2.0));
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| reps[a].w.partial_cmp(&reps[b].w).unwrap());
    let x_crit = if ctx.params.x_grid.contains(&1.0) {
        1.0
    } else {
        ctx.params.x_grid.iter().copied().fold(0.0, f64::max)
    };
    for (xi, &x) in ctx.params.x_grid.iter().enumerate() {
        let mut decile_rows = Vec::new();
        let (mut num, mut den) = (0.0, 0.0);
        for d in 0..DECILES {
            let lo = d * order.len() / DECILES;
            let hi = (d + 1) * order.len() / DECILES;
            let idx = &order[lo..hi];
            let c: Vec<f64> = idx.iter().map(|&j| reps[j].counts[xi] as f64).collect();
            let y: Vec<f64> = idx.iter().map(|&j| x.powf(rho + 2.0) * reps[j].w.powf(-rho)).collect();
            let (lam, se) = ratio_estimate(&c, &y);
            let (mw, _) = mean_var(&idx.iter().map(|&j| reps[j].w).collect::<Vec<_>>());
            decile_rows.push(vec![d as f64 + 1.0, mw, lam, se]);
            if se > 0.0 {
                num += lam / (se * se);
                den += 1.0 / (se * se);
            }
        }
        let (lam, se) = (num / den, den.sqrt().recip());
        let at = At::default().rho(rho).n(n).x(x);
        let rel = (lam / laplace_rate - 1.0).abs();
        let pass = rel <= 0.10;
        r.row("empty-rate", at, lam, Some(se), laplace_rate, RefSource::ClosedForm, pass);
        r.plot(&format!("empty_rate_deciles_x{x}{suffix}"), &["decile", "mean_w", "rate", "stderr"], decile_rows);
        if x == x_crit {
            let z_printed = (printed_rate - lam) / se;
            r.criterion(format!("A4-representation-rate{suffix}"), pass, lam, laplace_rate, 0.10);
            r.criterion(format!("A4-printed-rate-rejected{suffix}"), z_printed > 5.0, z_printed, printed_rate, 5.0);
        }
    }
    Ok(())
}
