//! Empty bins of a deterministic power law `p_i = α i^{-δ}` near the edge of the
//! occupied region.
//!
//! With `B = log n - (1+δ) log B` and `φ = (αδ)^{1/δ} B^{-(1+1/δ)} n^{1/δ}`, the points
//! `i/φ - B` of the empty bins have limit intensity `(αδ)^{1/δ} e^x`.

use yule_bins_core::limits::det_limit_intensity;
use yule_bins_core::yule::{deterministic_power_law, power_tail, ScaleDescriptor};
use yule_bins_core::{Interval, Result};

use super::{rel_err, timed, Ctx};
use crate::output::{At, RefSource, Report};

const WINDOW_TOLERANCE: f64 = 0.25;
const PROFILE_TOLERANCE: f64 = 0.10;

pub fn run(ctx: &Ctx, r: &mut Report) -> Result<()> {
    timed(r, "A12", |r| compare(ctx, r))
}

/// Fixed point of `B = log n - (1+δ) log B`.
pub(crate) fn edge_offset(n: f64, delta: f64) -> f64 {
    let ln = n.ln();
    let mut b = ln;
    for _ in 0..200 {
        let next = ln - (1.0 + delta) * b.ln();
        if (next - b).abs() < 1e-14 * ln {
            return next;
        }
        b = next;
    }
    b
}

fn windows(grid: &[f64]) -> Result<Vec<Interval>> {
    let mut w: Vec<Interval> = grid.windows(2).map(|p| Interval::new(p[0], p[1])).collect::<Result<_>>()?;
    if grid.len() > 2 {
        w.push(Interval::new(grid[0], grid[grid.len() - 1])?);
    }
    Ok(w)
}

fn compare(ctx: &Ctx, r: &mut Report) -> Result<()> {
    let n_max = ctx.params.n_grid.iter().copied().fold(0.0, f64::max);
    let grid = &ctx.params.x_grid;
    let wins = windows(grid)?;
    let unit = grid.len() - 1;
    let (mut win_ok, mut win_worst) = (true, 0.0f64);
    let (mut prof_ok, mut prof_worst) = (true, 0.0f64);
    for &delta in &ctx.params.delta {
        // α = 1/ζ(δ) makes the vector a probability law before truncation
        let alpha = 1.0 / power_tail(delta, 0);
        let mut profile_rows = Vec::new();
        for &nf in &ctx.params.n_grid {
            let b = edge_offset(nf, delta);
            let mult = (alpha * delta).powf(1.0 / delta) * b.powf(-(1.0 + 1.0 / delta));
            let scale = ScaleDescriptor::power(nf as u64, 1.0 / delta).with_affine(mult, b);
            let phi = scale.phi();
            let n_bins = (phi * (b + grid[grid.len() - 1])).ceil() as usize + 2;
            let pv = deterministic_power_law(alpha, delta, n_bins)?;
            let counts: Vec<f64> = wins
                .iter()
                .map(|w| {
                    pv.probs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| w.contains(scale.map(i + 1)))
                        .map(|(_, p)| (-nf * p).exp())
                        .sum()
                })
                .collect();
            let at_max = nf == n_max;
            for (w, &c) in wins.iter().zip(&counts) {
                let reference = det_limit_intensity(w, alpha, delta)?;
                let rel = rel_err(c, reference);
                let pass = rel <= WINDOW_TOLERANCE;
                if at_max {
                    win_ok &= pass;
                    win_worst = win_worst.max(rel);
                }
                let at = At::default().n(nf).alpha(alpha).delta(delta).x(w.lo);
                r.row("window-count", at, c, None, reference, RefSource::ClosedForm, pass);
            }
            for k in 0..unit.saturating_sub(1) {
                let ratio = counts[k] / counts[k + 1];
                let reference = det_limit_intensity(&wins[k], alpha, delta)? / det_limit_intensity(&wins[k + 1], alpha, delta)?;
                let rel = rel_err(ratio, reference);
                let pass = rel <= PROFILE_TOLERANCE;
                if at_max {
                    prof_ok &= pass;
                    prof_worst = prof_worst.max(rel);
                }
                let at = At::default().n(nf).alpha(alpha).delta(delta).x(wins[k].lo);
                r.row("window-ratio", at, ratio, None, reference, RefSource::ClosedForm, pass);
                profile_rows.push(vec![nf, wins[k].lo, ratio, reference]);
            }
        }
        r.plot(&format!("window_ratio_delta{delta}"), &["n", "window_lo", "ratio", "limit"], profile_rows);
    }
    r.criterion("A12-window", win_ok, win_worst, 0.0, WINDOW_TOLERANCE);
    r.criterion("A12-ratio-profile", prof_ok, prof_worst, 0.0, PROFILE_TOLERANCE);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_offset_solves_fixed_point() {
        let b = edge_offset(1e8, 2.0);
        assert!((b - (1e8f64.ln() - 3.0 * b.ln())).abs() < 1e-10);
    }
}
