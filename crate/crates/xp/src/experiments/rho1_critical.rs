//! The critical case `ρ = 1` at scale `x n^{1/3} (log n)^{-β}`.

use yule_bins_core::limits::expected_inv_d_rho;
use yule_bins_core::par::replicate;
use yule_bins_core::rare::{conditioned_exp_sum, rho1_conditioned_limit, Method};
use yule_bins_core::rng::RngStream;
use yule_bins_core::yule::sample_d_rho;
use yule_bins_core::{EstimateWithCI, Result};

use super::{rel_err, timed, within_sigma, Ctx};
use crate::output::{At, RefSource, Report};

const SATURATION: f64 = 1.0 / 3.0;
const RATIO_TOLERANCE: f64 = 0.05;
const LIMIT_TOLERANCE: f64 = 0.10;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "A9-profile", |r| profile(ctx, r))?;
    timed(r, "A9-inv-d1", |r| inverse_mean(ctx, r))
}

fn profile(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let beta = ctx.params.beta.expect("validated");
    let x = ctx.params.x_grid[0];
    let n = ctx.params.n_grid.iter().copied().fold(0.0, f64::max);
    let ln = n.ln();
    let k_max = (x * n.powf(1.0 / 3.0) * ln.powf(-beta)).floor() as usize;
    let norm = ln.powf(1.0 - 3.0 * beta);
    let mut a_grid = ctx.params.delta.clone();
    a_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut f = Vec::with_capacity(a_grid.len());
    for &a in &a_grid {
        let s = conditioned_exp_sum(n, k_max, 1.0, a * ln, Method::Quadrature)?;
        let v = s.value / norm;
        let reference = rho1_conditioned_limit(a, x);
        let pass = rel_err(v, reference) <= LIMIT_TOLERANCE;
        r.row("normalized-conditioned-count", At::default().rho(1.0).n(n).delta(a).x(x), v, Some(s.error_estimate / norm), reference, RefSource::PaperFormula, pass);
        f.push(v);
    }
    // least squares through the origin below the saturation point
    let (sxy, sxx) = a_grid
        .iter()
        .zip(&f)
        .filter(|(&a, _)| a < SATURATION)
        .fold((0.0, 0.0), |(sxy, sxx), (&a, &v)| (sxy + a * v, sxx + a * a));
    let slope = sxy / sxx;
    let plateau = *f.last().expect("non-empty grid");
    let ratio = plateau / slope;
    let pass = rel_err(ratio, SATURATION) <= RATIO_TOLERANCE;
    let at = At::default().rho(1.0).n(n).x(x);
    r.row("plateau-slope-ratio", at, ratio, None, SATURATION, RefSource::PaperFormula, pass);
    r.criterion("A9-plateau-slope-ratio", pass, ratio, SATURATION, RATIO_TOLERANCE);
    r.plot(
        "conditioned_count_vs_a",
        &["a", "normalized_count", "limit"],
        a_grid.iter().zip(&f).map(|(&a, &v)| vec![a, v, rho1_conditioned_limit(a, x)]).collect(),
    );
    Ok(())
}

/// `1/D_1` has infinite variance, so the standard error is nominal.
fn inverse_mean(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let seed = ctx.seed("inv-d1");
    let vals = replicate(ctx.params.replications, |j| {
        let mut rng = RngStream::new(seed, j).rng();
        sample_d_rho(1.0, &mut rng).map(|d| 1.0 / d)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let est = EstimateWithCI::from_samples(&vals, seed, "mc");
    let reference = expected_inv_d_rho(1.0)?;
    let pass = within_sigma(est.value, est.stderr, reference, 4.0);
    r.row("inverse-d-mean", At::default().rho(1.0), est.value, Some(est.stderr), reference, RefSource::ClosedForm, pass);
    r.criterion("A9-inv-d1", pass, est.z_score(reference), 0.0, 4.0);
    Ok(())
}
