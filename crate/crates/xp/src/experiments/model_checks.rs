//! Exact invariants and marginal laws of the split sequence and bin probabilities.

use rand_distr::{Distribution, Exp1};
use yule_bins_core::limits::{gumbel_cdf, tn_cdf};
use yule_bins_core::par::replicate;
use yule_bins_core::ppstats::{ks_statistic, ks_test, ReplicatedSamples};
use yule_bins_core::rng::RngStream;
use yule_bins_core::special::ln_gamma;
use yule_bins_core::yule::{bin_probabilities, sample_splits, throw_additional, throw_balls, ThrowMode};
use yule_bins_core::{EstimateWithCI, Result};

use super::{timed, within_sigma, Ctx};
use crate::output::{At, RefSource, Report};

const A1_VECTORS: usize = 100;
const TN_INDICES: [usize; 3] = [1, 10, 100];
const INEQ_Y: [f64; 3] = [0.1, 0.5, 1.0];
const INEQ_DRAWS: usize = 100_000;
const Z_INDICES: [usize; 3] = [2, 10, 100];

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "A1", |r| normalization(ctx, r))?;
    timed(r, "A2", |r| marginal_laws(ctx, r))?;
    timed(r, "ineq1", |r| inequality(ctx, r))?;
    timed(r, "condition-c", |r| condition_c(ctx, r))?;
    timed(r, "z-law", |r| z_law(ctx, r))?;
    timed(r, "coupling", |r| coupling(ctx, r))
}

/// `E e^{-ρ t_N} = Γ(N+1) Γ(1+ρ) / Γ(N+1+ρ)`.
fn expected_tail_mass(n: usize, rho: f64) -> f64 {
    let nf = n as f64;
    (ln_gamma(nf + 1.0) + ln_gamma(1.0 + rho) - ln_gamma(nf + 1.0 + rho)).exp()
}

fn normalization(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let n_bins = ctx.params.n_grid[0] as usize;
    let seed = ctx.seed("A1");
    let (mut worst_norm, mut worst_dec) = (0.0f64, 0.0f64);
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        let stats = replicate(A1_VECTORS, |j| {
            let mut rng = RngStream::new(seed, (ri * A1_VECTORS) as u64 + j).rng();
            let splits = sample_splits(n_bins, &mut rng).expect("n_bins validated");
            let pv = bin_probabilities(&splits, rho).expect("rho validated");
            let norm = (pv.total_mass() - 1.0).abs();
            let dec = pv
                .probs
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > f64::MIN_POSITIVE)
                .map(|(i, &p)| ((pv.decomposed(i + 1) - p) / p).abs())
                .fold(0.0f64, f64::max);
            (norm, dec, pv.tail_mass)
        });
        let norm = stats.iter().map(|s| s.0).fold(0.0, f64::max);
        let dec = stats.iter().map(|s| s.1).fold(0.0, f64::max);
        worst_norm = worst_norm.max(norm);
        worst_dec = worst_dec.max(dec);
        let at = At::default().rho(rho).n(n_bins as f64);
        r.row("normalization-max-error", at, norm, None, 0.0, RefSource::ClosedForm, norm <= 1e-12);
        r.row("decomposition-max-rel-error", at, dec, None, 0.0, RefSource::ClosedForm, dec <= 1e-12);
        let tails: Vec<f64> = stats.iter().map(|s| s.2).collect();
        let est = EstimateWithCI::from_samples(&tails, seed, "mc");
        let reference = expected_tail_mass(n_bins, rho);
        r.row(
            "tail-mass",
            at,
            est.value,
            Some(est.stderr),
            reference,
            RefSource::ClosedForm,
            within_sigma(est.value, est.stderr, reference, 4.0),
        );
    }
    r.criterion("A1-normalization", worst_norm <= 1e-12, worst_norm, 0.0, 1e-12);
    r.criterion("A1-decomposition", worst_dec <= 1e-12, worst_dec, 0.0, 1e-12);
    Ok(())
}

fn cdf_plot(values: &[f64], cdf: impl Fn(f64) -> f64, points: usize) -> Vec<Vec<f64>> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    (0..points)
        .map(|k| {
            let idx = ((k as f64 + 0.5) / points as f64 * n as f64) as usize;
            let x = v[idx.min(n - 1)];
            vec![x, (idx.min(n - 1) + 1) as f64 / n as f64, cdf(x)]
        })
        .collect()
}

fn marginal_laws(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let reps = ctx.params.replications;
    let seed = ctx.seed("A2");
    let max_index = *TN_INDICES.iter().max().unwrap();
    // one sequence per replication serves every index
    let times = replicate(reps, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let s = sample_splits(max_index, &mut rng).expect("positive length");
        TN_INDICES.map(|i| s.time(i))
    });
    for (k, &i) in TN_INDICES.iter().enumerate() {
        let vals: Vec<f64> = times.iter().map(|t| t[k]).collect();
        let g = ks_test(&ReplicatedSamples::new(vals.clone(), seed)?, |x| tn_cdf(i as u64, x), "tn_cdf")?;
        let pass = g.p_value > 0.01;
        r.row("tn-ks-pvalue", At::default().n(i as f64), g.p_value, None, 0.01, RefSource::ClosedForm, pass);
        r.criterion(format!("A2-tn-ks-n{i}"), pass, g.p_value, 0.01, 0.01);
        r.plot(&format!("tn_cdf_n{i}"), &["x", "empirical", "analytic"], cdf_plot(&vals, |x| tn_cdf(i as u64, x), 200));
    }
    let big_n = ctx.params.n_grid[0] as usize;
    let seed = ctx.seed("A2-gumbel");
    let m: Vec<f64> = replicate(reps, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let s = sample_splits(big_n, &mut rng).expect("positive length");
        s.martingale[big_n - 1]
    });
    let d = ks_statistic(&m, gumbel_cdf);
    let pass = d < 0.02;
    r.row("gumbel-ks-statistic", At::default().n(big_n as f64), d, None, 0.02, RefSource::ClosedForm, pass);
    r.criterion("A2-gumbel-ks", pass, d, 0.0, 0.02);
    r.plot("gumbel_cdf", &["x", "empirical", "analytic"], cdf_plot(&m, gumbel_cdf, 200));
    Ok(())
}

fn inequality(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let seed = ctx.seed("ineq1");
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (yi, &y) in INEQ_Y.iter().enumerate() {
        let mut vals: Vec<f64> = {
            let mut rng = RngStream::new(seed, yi as u64).rng();
            (0..INEQ_DRAWS)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    -(-y * e).exp_m1() / y
                })
                .collect()
        };
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &x in &ctx.params.x_grid {
            let p = vals.partition_point(|&v| v <= x) as f64 / INEQ_DRAWS as f64;
            let sigma = (p * (1.0 - p) / INEQ_DRAWS as f64).sqrt();
            let bound = std::f64::consts::E * -(-x).exp_m1();
            let pass = p <= bound + 3.0 * sigma;
            ok &= pass;
            worst = worst.max(p - bound);
            r.row("ineq1-probability", At::default().x(x).delta(y), p, Some(sigma), bound, RefSource::PaperFormula, pass);
        }
    }
    r.criterion("ineq1", ok, worst, 0.0, 0.0);
    Ok(())
}

/// `sup_{x ∈ (0, 1/2]} |P(Z_i <= x) - x/ρ| / x²` with `P(Z_i <= x) = 1 - (1 - x/i)^{i/ρ}`.
fn condition_c_sup(i: usize, rho: f64) -> f64 {
    let fi = i as f64;
    (1..=200)
        .map(|k| {
            let x = 0.5 * k as f64 / 200.0;
            let cdf = -((fi / rho) * (-x / fi).ln_1p()).exp_m1();
            (cdf - x / rho).abs() / (x * x)
        })
        .fold(0.0, f64::max)
}

fn condition_c(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for &rho in &ctx.params.rho {
        let bound = 0.5 / (rho * rho) + 1.0 / rho;
        let sup = (2..=10_000).map(|i| condition_c_sup(i, rho)).fold(0.0, f64::max);
        let pass = sup <= bound;
        ok &= pass;
        worst_ratio = worst_ratio.max(sup / bound);
        r.row("condition-c-sup", At::default().rho(rho), sup, None, bound, RefSource::ClosedForm, pass);
    }
    r.criterion("condition-c", ok, worst_ratio, 1.0, 0.0);
    Ok(())
}

fn z_law(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let seed = ctx.seed("z-law");
    let reps = ctx.params.replications;
    let tests = ctx.params.rho.len() * Z_INDICES.len();
    let level = 0.01 / tests as f64;
    let mut min_p = 1.0f64;
    for (ri, &rho) in ctx.params.rho.iter().enumerate() {
        for (ii, &i) in Z_INDICES.iter().enumerate() {
            let fi = i as f64;
            let mut rng = RngStream::new(seed, (ri * Z_INDICES.len() + ii) as u64).rng();
            let vals: Vec<f64> = (0..reps)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    fi * -(-rho * e / fi).exp_m1()
                })
                .collect();
            let cdf = |x: f64| {
                if x >= fi {
                    1.0
                } else {
                    -((fi / rho) * (-x / fi).ln_1p()).exp_m1()
                }
            };
            let g = ks_test(&ReplicatedSamples::new(vals, seed)?, cdf, "z_law")?;
            min_p = min_p.min(g.p_value);
            r.row("z-ks-pvalue", At::default().rho(rho).n(fi), g.p_value, None, level, RefSource::ClosedForm, g.p_value > level);
        }
    }
    r.criterion("z-law", min_p > level, min_p, level, level);
    Ok(())
}

fn coupling(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let seed = ctx.seed("coupling");
    let reps = 200;
    let violations: usize = replicate(reps, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        let splits = sample_splits(500, &mut rng).expect("positive length");
        let pv = bin_probabilities(&splits, 1.0).expect("valid rho");
        let mut occ = throw_balls(&pv, 5_000, ThrowMode::Exact, &mut rng);
        let mut prev = occ.level_count_upto(0, 500);
        let mut bad = 0;
        for _ in 0..5 {
            throw_additional(&mut occ, &pv, 5_000, &mut rng).expect("exact mode");
            let now = occ.level_count_upto(0, 500);
            bad += usize::from(now > prev);
            prev = now;
        }
        bad
    })
    .into_iter()
    .sum();
    r.row("coupled-monotonicity-violations", At::default().rho(1.0), violations as f64, None, 0.0, RefSource::ClosedForm, violations == 0);
    r.criterion("coupled-monotonicity", violations == 0, violations as f64, 0.0, 0.0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_mass_formula_small_n() {
        // E e^{-ρ t_1} = 1 / (1 + ρ)
        assert!((expected_tail_mass(1, 2.0) - 1.0 / 3.0).abs() < 1e-13);
        assert!((expected_tail_mass(2, 1.0) - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn condition_c_bounded() {
        for rho in [0.5, 1.0, 2.0] {
            let b = 0.5 / (rho * rho) + 1.0 / rho;
            assert!(condition_c_sup(2, rho) <= b && condition_c_sup(10_000, rho) <= b);
        }
    }
}
