//! The `D_ρ = Gamma(⌊ρ⌋+1, 1)^ρ` identity and the mixed Poisson count law.

use rand_distr::{Beta, Distribution, Exp1};
use yule_bins_core::error::Error;
use yule_bins_core::limits::{
    expected_inv_d_rho, expected_inv_d_rho_truncated, mixed_poisson_count_pmf, mixed_poisson_tail_probability,
    nu_survival_limit,
};
use yule_bins_core::par::replicate;
use yule_bins_core::ppstats::{ks_test, ReplicatedSamples};
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::gamma_cdf;
use yule_bins_core::yule::sample_d_rho;
use yule_bins_core::{EstimateWithCI, Result};

use super::{quad, timed, within_sigma, Ctx};
use crate::output::{At, RefSource, Report};

/// Increments summed one by one; the rest of the sum is drawn in one step.
const DIRECT_TERMS: usize = 10_000;
const INV_MEAN_FACTOR: usize = 100;
const PMF_HEAD: u64 = 25;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "A10", |r| d_rho_identity(ctx, r))?;
    timed(r, "pmf", |r| pmf_checks(ctx, r))
}

/// `N e^{-(t_N - t_k)}`, so that `exp(-ρ[M_N - M_k - log k])` is its `ρ`-th power.
///
/// `Σ_{i=m+1}^{N} E_i / i` is the `(N-m)`-th order statistic of `N` unit exponentials,
/// i.e. `-ln B` with `B ~ Beta(m+1, N-m)`.
fn truncated_oracle(k: usize, big_n: usize, rng: &mut impl rand::Rng) -> f64 {
    let m = DIRECT_TERMS.clamp(k, big_n);
    let mut s = 0.0;
    for i in (k + 1..=m).rev() {
        let e: f64 = Exp1.sample(rng);
        s += e / i as f64;
    }
    if big_n > m {
        let b = Beta::new((m + 1) as f64, (big_n - m) as f64).expect("positive shapes");
        let u: f64 = b.sample(rng);
        s -= u.ln();
    }
    big_n as f64 * (-s).exp()
}

fn d_rho_identity(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let big_n = ctx.params.n_grid[0] as usize;
    let reps = ctx.params.replications;
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        let k = rho.floor() as usize;
        if big_n <= k {
            return Err(Error::InvalidArgument("truncation index must exceed floor(rho)".into()));
        }
        let seed = ctx.seed(&format!("A10-oracle-{ri}"));
        let oracle: Vec<f64> = replicate(reps, |j| {
            let mut rng = RngStream::new(seed, j).rng();
            truncated_oracle(k, big_n, &mut rng).powf(rho)
        });
        let shape = k as f64 + 1.0;
        let cdf = |d: f64| if d <= 0.0 { 0.0 } else { gamma_cdf(shape, d.powf(1.0 / rho)) };
        let g = ks_test(&ReplicatedSamples::new(oracle.clone(), seed)?, cdf, "gamma_power")?;
        let at = At::default().rho(rho).n(big_n as f64);
        let pass = g.p_value > 0.01;
        r.row("d-rho-oracle-ks-pvalue", at, g.p_value, None, 0.01, RefSource::ClosedForm, pass);
        r.criterion(format!("A10-ks-rho{rho}"), pass, g.p_value, 0.01, 0.01);

        let exact = expected_inv_d_rho(rho)?;
        let trunc = expected_inv_d_rho_truncated(rho, big_n as u64);
        r.row("inv-d-truncated-product", at, trunc, None, exact, RefSource::ClosedForm, (trunc / exact - 1.0).abs() < 1e-3);

        let inv: Vec<f64> = oracle.iter().map(|d| 1.0 / d).collect();
        let est = EstimateWithCI::from_samples(&inv, seed, "mc");
        r.row(
            "inv-d-oracle-mean",
            at,
            est.value,
            Some(est.stderr),
            trunc,
            RefSource::ClosedForm,
            within_sigma(est.value, est.stderr, trunc, 4.0),
        );

        let seed = ctx.seed(&format!("A10-gamma-{ri}"));
        let draws = reps * INV_MEAN_FACTOR;
        const CHUNK: usize = 10_000;
        let sums = replicate(draws.div_ceil(CHUNK), |c| {
            let mut rng = RngStream::new(seed, c).rng();
            let len = CHUNK.min(draws - c as usize * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let v = 1.0 / sample_d_rho(rho, &mut rng).expect("rho >= 1");
                s += v;
                s2 += v * v;
            }
            (s, s2)
        });
        let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let nf = draws as f64;
        let mean = s / nf;
        let se = ((s2 / nf - mean * mean) / (nf - 1.0)).max(0.0).sqrt();
        let pass = within_sigma(mean, se, exact, 4.0);
        r.row("inv-d-gamma-mean", at.n(nf), mean, Some(se), exact, RefSource::ClosedForm, pass);
        r.criterion(format!("A10-inv-mean-rho{rho}"), pass, mean, exact, 4.0 * se);
    }
    Ok(())
}

fn pmf_checks(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let spec = quad();
    let mut rhos = vec![0.5];
    rhos.extend(ctx.params.rho.iter().copied());
    let (mut worst_norm, mut worst_zero) = (0.0f64, 0.0f64);
    let mut series = Vec::new();
    for &rho in &rhos {
        for &x in &ctx.params.x_grid {
            let head: Vec<f64> = (0..PMF_HEAD)
                .map(|j| mixed_poisson_count_pmf(j, x, rho, &spec))
                .collect::<Result<_>>()?;
            let total = head.iter().sum::<f64>() + mixed_poisson_tail_probability(PMF_HEAD, x, rho, &spec)?;
            let zero = nu_survival_limit(x, rho, &spec)?;
            let at = At::default().rho(rho).x(x);
            worst_norm = worst_norm.max((total - 1.0).abs());
            worst_zero = worst_zero.max((head[0] - zero).abs());
            r.row("pmf-normalization", at, total, None, 1.0, RefSource::Quadrature, (total - 1.0).abs() <= 1e-8);
            r.row("pmf-zero-vs-void", at, head[0], None, zero, RefSource::Quadrature, (head[0] - zero).abs() <= 1e-9);
            for (j, p) in head.iter().enumerate() {
                series.push(vec![rho, x, j as f64, *p]);
            }
        }
    }
    r.criterion("pmf-normalization", worst_norm <= 1e-8, worst_norm, 0.0, 1e-8);
    r.criterion("pmf-zero-vs-void", worst_zero <= 1e-9, worst_zero, 0.0, 1e-9);
    r.plot("mixed_poisson_pmf", &["rho", "x", "j", "pmf"], series);
    Ok(())
}
