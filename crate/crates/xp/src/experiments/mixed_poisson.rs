//! Empty counts at scale `n^{1/(ρ+2)}` for `ρ < 1`: finite mean, overdispersion and
//! the poissonization gap.

use yule_bins_core::estimate::mean_var;
use yule_bins_core::limits::{mean_count_limit, mixed_poisson_count_pmf};
use yule_bins_core::par::replicate;
use yule_bins_core::ppstats::{count_pmf_test, dispersion_index};
use yule_bins_core::rare::{exact_exp_sum, poissonization_gap_bound};
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::poisson_pmf;
use yule_bins_core::yule::{bin_probabilities, distribution_truncation, sample_splits, throw_balls, ThrowMode};
use yule_bins_core::{EstimateWithCI, Result};

use super::{quad, rel_err, timed, Ctx};
use crate::output::{At, RefSource, Report};

const DISPERSION_BATCHES: usize = 20;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "A5", |r| mean_and_dispersion(ctx, r))?;
    timed(r, "A11", |r| bridge(ctx, r))
}

fn n_max(ctx: &Ctx) -> f64 {
    ctx.params.n_grid.iter().copied().fold(0.0, f64::max)
}

fn n_min(ctx: &Ctx) -> f64 {
    ctx.params.n_grid.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Counts of bins with exactly `level` balls among the first `⌊x n^{1/(ρ+2)}⌋`.
#[allow(clippy::too_many_arguments)]
fn level_counts(ctx: &Ctx, rho: f64, n: u64, x: f64, level: u64, mode: ThrowMode, n_bins: usize, seed: u64) -> Vec<u64> {
    let limit = (x * (n as f64).powf(1.0 / (rho + 2.0))).floor() as usize;
    replicate(ctx.params.replications, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let splits = sample_splits(n_bins, &mut rng).expect("positive length");
        let pv = bin_probabilities(&splits, rho).expect("rho validated");
        let occ = throw_balls(&pv, n, mode, &mut rng);
        occ.level_count_upto(level, limit) as u64
    })
}

fn mean_and_dispersion(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let n = n_max(ctx) as u64;
    let level = ctx.params.k_level;
    let spec = quad();
    let tag = |base: &str, rho: f64, x: f64| {
        let mut s = base.to_string();
        if ctx.params.rho.len() > 1 {
            s += &format!("-rho{rho}");
        }
        if ctx.params.x_grid.len() > 1 {
            s += &format!("-x{x}");
        }
        s
    };
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        for (xi, &x) in ctx.params.x_grid.iter().enumerate() {
            let seed = ctx.seed(&format!("A5-{ri}-{xi}"));
            let n_bins = distribution_truncation(n, rho, x);
            let counts = level_counts(ctx, rho, n, x, level, ThrowMode::Poissonized, n_bins, seed);
            let at = At::default().rho(rho).n(n as f64).x(x);
            let reference = mean_count_limit(x, rho)?.finite().expect("rho < 1 validated");

            let vals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let est = EstimateWithCI::from_samples(&vals, seed, "mc");
            let rel = rel_err(est.value, reference);
            let z = est.z_score(reference).abs();
            r.row("mean-count", at, est.value, Some(est.stderr), reference, RefSource::ClosedForm, rel <= 0.05 && z <= 3.0);
            r.criterion(tag("A5-mean-rel", rho, x), rel <= 0.05, rel, reference, 0.05);
            r.criterion(tag("A5-mean-z", rho, x), z <= 3.0, z, 0.0, 3.0);

            let d = dispersion_index(&counts)?;
            let batch = counts.len() / DISPERSION_BATCHES;
            let batch_d = (0..DISPERSION_BATCHES)
                .map(|b| dispersion_index(&counts[b * batch..(b + 1) * batch]))
                .collect::<Result<Vec<_>>>()?;
            let (_, v) = mean_var(&batch_d);
            let se = (v / DISPERSION_BATCHES as f64).sqrt();
            let z_over = (d - 1.0) / se;
            r.row("dispersion-index", at, d, Some(se), 1.0, RefSource::ClosedForm, z_over > 3.0);
            r.criterion(tag("A5-overdispersion", rho, x), z_over > 3.0, z_over, 0.0, 3.0);

            // a Poisson law with the same mean must be rejected
            let g = count_pmf_test(&counts, |j| poisson_pmf(j, est.value), "poisson", seed)?;
            r.row("poisson-gof-pvalue", at, g.p_value, None, 0.01, RefSource::ClosedForm, g.p_value < 0.01);

            let top = counts.iter().copied().max().unwrap_or(0) + 50;
            let table = (0..=top)
                .map(|j| mixed_poisson_count_pmf(j, x, rho, &spec))
                .collect::<Result<Vec<_>>>()?;
            let g = count_pmf_test(&counts, |j| table.get(j as usize).copied().unwrap_or(0.0), "mixed_poisson", seed)?;
            r.row("mixed-poisson-gof-pvalue", at, g.p_value, None, 0.01, RefSource::Quadrature, g.p_value > 0.01);

            let max_j = (3.0 * reference).ceil().max(10.0) as u64;
            let m = counts.len() as f64;
            let rows = (0..=max_j)
                .map(|j| {
                    let emp = counts.iter().filter(|&&c| c == j).count() as f64 / m;
                    vec![j as f64, emp, table.get(j as usize).copied().unwrap_or(0.0), poisson_pmf(j, est.value)]
                })
                .collect();
            r.plot(&tag("count_pmf", rho, x), &["j", "empirical", "mixed_poisson", "poisson"], rows);
        }
    }
    Ok(())
}

/// Exact-mode mean empty count against the sum of `E e^{-n P_i}` over the same bins.
fn bridge(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let n = n_min(ctx) as u64;
    let nf = n as f64;
    let spec = quad();
    let mut ok = true;
    let mut worst = 0.0f64;
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        let phi = nf.powf(1.0 / (rho + 2.0));
        for (xi, &x) in ctx.params.x_grid.iter().enumerate() {
            let seed = ctx.seed(&format!("A11-{ri}-{xi}"));
            let bins = (x * phi).floor() as usize;
            if bins == 0 {
                continue;
            }
            let counts = level_counts(ctx, rho, n, x, 0, ThrowMode::Exact, bins, seed);
            let vals: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
            let est = EstimateWithCI::from_samples(&vals, seed, "mc");
            let (reference, _) = exact_exp_sum(nf, 1, bins, rho, &spec)?;
            let gap = poissonization_gap_bound(nf, phi, x);
            let pass = (est.value - reference).abs() <= gap + 3.0 * est.stderr;
            ok &= pass;
            worst = worst.max((est.value - reference).abs() / (gap + 3.0 * est.stderr));
            r.row("poissonization-bridge", At::default().rho(rho).n(nf).x(x), est.value, Some(est.stderr), reference, RefSource::Quadrature, pass);
        }
    }
    r.criterion("A11-bridge", ok, worst, 0.0, 1.0);
    Ok(())
}
