//! Limit laws of the occupancy scheme, in closed form or by quadrature.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::{ExtendedReal, Interval, Rect};
use crate::quad::{integrate, integrate_with_breaks, QuadratureSpec, Transform};
use crate::special::{gamma, gamma_p, poisson_pmf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawId {
    TnCdf,
    Gumbel,
    NuSurvival,
    MixedPoissonPmf,
    MeanCount,
    LaplaceRectangle,
    DetIntensity,
}

impl LawId {
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            LawId::TnCdf => &["n"],
            LawId::Gumbel => &[],
            LawId::NuSurvival => &["rho"],
            LawId::MixedPoissonPmf => &["x", "rho"],
            LawId::MeanCount => &["rho"],
            LawId::LaplaceRectangle => &["a", "b", "theta", "rho"],
            LawId::DetIntensity => &["alpha", "delta"],
        }
    }
}

/// Names a limit law and its parameters, for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitLawHandle {
    pub law_id: LawId,
    pub parameters: Vec<(String, f64)>,
}

impl LimitLawHandle {
    pub fn new(law_id: LawId, parameters: &[(&str, f64)]) -> Result<Self> {
        for req in law_id.required_params() {
            if !parameters.iter().any(|(k, _)| k == req) {
                return Err(invalid(format!("{law_id:?} needs parameter {req}")));
            }
        }
        Ok(Self {
            law_id,
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        })
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// `(1 - e^{-x})^n`.
pub fn tn_cdf(n: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    (n as f64 * (-(-x).exp()).ln_1p()).exp()
}

/// `1 - (1 - e^{-x})^n`, accurate in the upper tail.
pub fn tn_survival(n: u64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    -(n as f64 * (-(-x).exp()).ln_1p()).exp_m1()
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("rho must be positive, got {rho}")))
    }
}

fn exp_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        transform: Transform::ExpSubstitution,
        ..*spec
    }
}

/// `E exp(-K W^{-ρ})` for `W ~ Exp(1)`.
pub fn mixed_void_probability(k: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    if k <= 0.0 {
        return Ok(1.0);
    }
    let w_star = k.powf(1.0 / rho);
    let mut pts = vec![0.0];
    for m in [0.25, 1.0, 4.0] {
        let p = m * w_star;
        if p > 1e-12 && p < 700.0 {
            pts.push(p);
        }
    }
    pts.push(f64::INFINITY);
    let f = |w: f64| (-k * w.powf(-rho) - w).exp();
    Ok(integrate_with_breaks(f, &pts, &exp_spec(spec))?.value)
}

fn mixing_constant(x: f64, rho: f64) -> f64 {
    x.powf(rho + 2.0) / (rho * (rho + 2.0))
}

/// Limit of `P(ν_n / n^{1/(ρ+2)} > x)`.
pub fn nu_survival_limit(x: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    if x < 0.0 {
        return Err(invalid("x must be non-negative"));
    }
    mixed_void_probability(mixing_constant(x, rho), rho, spec)
}

/// Limit mean number of empty bins in `[0, x]`; diverges for `ρ >= 1`.
pub fn mean_count_limit(x: f64, rho: f64) -> Result<ExtendedReal> {
    check_rho(rho)?;
    if x == 0.0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    if rho >= 1.0 {
        return Ok(ExtendedReal::PosInfinity);
    }
    Ok(ExtendedReal::Finite(mixing_constant(x, rho) * gamma(1.0 - rho)))
}

fn pmf_breakpoints(j: u64, k: f64, rho: f64) -> Vec<f64> {
    let center = (k / (j.max(1) as f64)).powf(1.0 / rho);
    let width = 1.0 / (rho * ((j + 1) as f64).sqrt());
    let mut pts = vec![0.0];
    for m in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        let p = center * (m * width).exp();
        if p > 1e-12 && p < 700.0 {
            pts.push(p);
        }
    }
    pts.push(f64::INFINITY);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// `P(N[0, x] = j)` under the mixed Poisson limit with mean `W^{-ρ} x^{ρ+2}/(ρ(ρ+2))`.
pub fn mixed_poisson_count_pmf(j: u64, x: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    if !(x > 0.0) {
        return Err(invalid("x must be positive"));
    }
    let k = mixing_constant(x, rho);
    let f = |w: f64| poisson_pmf(j, k * w.powf(-rho)) * (-w).exp();
    Ok(integrate_with_breaks(f, &pmf_breakpoints(j, k, rho), &exp_spec(spec))?.value)
}

/// `E[N 1{N >= j}]` under the same law.
pub fn mixed_poisson_tail_mean(j: u64, x: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    let k = mixing_constant(x, rho);
    // E[N 1{N >= j} | λ] = λ P(Pois(λ) >= j - 1)
    let f = |w: f64| {
        let lam = k * w.powf(-rho);
        let p = if j <= 1 { 1.0 } else { gamma_p((j - 1) as f64, lam) };
        lam * p * (-w).exp()
    };
    Ok(integrate_with_breaks(f, &pmf_breakpoints(j, k, rho), &exp_spec(spec))?.value)
}

/// `P(N >= j)` under the same law.
pub fn mixed_poisson_tail_probability(j: u64, x: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    if j == 0 {
        return Ok(1.0);
    }
    let k = mixing_constant(x, rho);
    let f = |w: f64| gamma_p(j as f64, k * w.powf(-rho)) * (-w).exp();
    Ok(integrate_with_breaks(f, &pmf_breakpoints(j, k, rho), &exp_spec(spec))?.value)
}

/// Limit Laplace functional of the 2-D process at `f = θ 1_rect`.
pub fn laplace_functional_limit(rect: &Rect, theta: f64, rho: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_rho(rho)?;
    if !(theta > 0.0) || rect.is_degenerate() || rect.x0 < 0.0 || rect.y0 < 0.0 {
        return Err(invalid("need theta > 0 and a non-degenerate rectangle in the positive quadrant"));
    }
    let k = -(-theta).exp_m1() * rect_intensity_mass(rect, rho);
    mixed_void_probability(k, rho, spec)
}

/// `(1/ρ) ∫_rect x^{ρ+1} dx dy`, the 2-D limit intensity mass per unit `W^{-ρ}`.
pub fn rect_intensity_mass(rect: &Rect, rho: f64) -> f64 {
    (rect.y1 - rect.y0) * (rect.x1.powf(rho + 2.0) - rect.x0.powf(rho + 2.0)) / (rho * (rho + 2.0))
}

/// Mass of the deterministic-comparison limit intensity `(αδ)^{1/δ} e^x` on a window.
pub fn det_limit_intensity(window: &Interval, alpha_coeff: f64, delta: f64) -> Result<f64> {
    if !(delta > 1.0) || !(alpha_coeff > 0.0) {
        return Err(invalid("need delta > 1 and alpha_coeff > 0"));
    }
    if !(window.lo.is_finite() && window.hi.is_finite()) {
        return Err(invalid("window must be bounded"));
    }
    Ok((alpha_coeff * delta).powf(1.0 / delta) * (window.hi.exp() - window.lo.exp()))
}

/// Same mass by quadrature of the density.
pub fn det_limit_intensity_quadrature(window: &Interval, alpha_coeff: f64, delta: f64) -> Result<f64> {
    let c = (alpha_coeff * delta).powf(1.0 / delta);
    Ok(integrate(|x: f64| c * x.exp(), window.lo, window.hi, &QuadratureSpec::default())?.value)
}

/// `E(1/D_ρ) = Γ(⌊ρ⌋ + 1 - ρ) / Γ(⌊ρ⌋ + 1)`.
pub fn expected_inv_d_rho(rho: f64) -> Result<f64> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be at least 1, got {rho}")));
    }
    let k = rho.floor();
    Ok(gamma(k + 1.0 - rho) / gamma(k + 1.0))
}

/// `E exp(ρ (t_N - t_k - log N)) = N^{-ρ} Π_{j=k+1}^{N} (1 - ρ/j)^{-1}`.
pub fn expected_inv_d_rho_truncated(rho: f64, n_terms: u64) -> f64 {
    let k = rho.floor() as u64;
    let mut log_sum = 0.0;
    for j in (k + 1..=n_terms).rev() {
        log_sum -= (-rho / j as f64).ln_1p();
    }
    (log_sum - rho * (n_terms as f64).ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn tn_cdf_examples() {
        for &x in &[0.1, 1.0, 3.0] {
            assert!((tn_cdf(1, x) - (1.0 - (-x).exp())).abs() < 1e-15);
        }
        assert_eq!(tn_cdf(7, 0.0), 0.0);
        assert!((tn_cdf(2, 2f64.ln()) - 0.25).abs() < 1e-15);
        assert!((tn_cdf(5, 2.0) + tn_survival(5, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gumbel_examples() {
        assert!((gumbel_cdf(0.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!((gumbel_cdf(-(2f64.ln()).ln()) - 0.5).abs() < 1e-15);
        assert!((-(2f64.ln()).ln() - 0.366_512_9).abs() < 1e-7);
        assert!(gumbel_cdf(50.0) > 1.0 - 1e-15 && gumbel_cdf(-50.0) < 1e-15);
    }

    #[test]
    fn cdfs_monotone_on_grid() {
        let mut prev = (0.0, 0.0);
        for i in 0..2000 {
            let x = -5.0 + 0.01 * i as f64;
            let cur = (tn_cdf(10, x), gumbel_cdf(x));
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1);
            assert!((0.0..=1.0).contains(&cur.0) && (0.0..=1.0).contains(&cur.1));
            prev = cur;
        }
    }

    #[test]
    fn nu_survival_shape() {
        assert!((nu_survival_limit(0.0, 1.0, &spec()).unwrap() - 1.0).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 1..40 {
            let v = nu_survival_limit(0.1 * i as f64, 1.0, &spec()).unwrap();
            assert!(v <= prev + 1e-12 && v >= 0.0);
            prev = v;
        }
        assert!(nu_survival_limit(20.0, 1.0, &spec()).unwrap() < 1e-6);
    }

    #[test]
    fn nu_survival_bessel_value() {
        // E exp(-a/W) = 2 sqrt(a) K_1(2 sqrt(a)) with a = 1/3
        let v = nu_survival_limit(1.0, 1.0, &spec()).unwrap();
        assert!((v - 0.539_032_157_698_983_9).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mean_count_examples() {
        let m = mean_count_limit(1.0, 0.5).unwrap().finite().unwrap();
        assert!((m - PI.sqrt() / 1.25).abs() < 1e-13);
        assert!((m - 1.417_963).abs() < 1e-6);
        assert_eq!(mean_count_limit(1.0, 1.0).unwrap(), ExtendedReal::PosInfinity);
        assert_eq!(mean_count_limit(0.0, 0.5).unwrap(), ExtendedReal::Finite(0.0));
        let q = integrate(|u: f64| u.powf(-0.5) * (-u).exp(), 0.0, f64::INFINITY, &QuadratureSpec::with_tolerance(1e-11).exp_substitution())
            .unwrap()
            .value;
        assert!((q / 1.25 - m).abs() < 1e-8);
    }

    #[test]
    fn pmf_head_plus_tail_is_one() {
        for &(x, rho) in &[(1.0, 0.5), (1.0, 1.0), (2.0, 2.0)] {
            let head: f64 = (0..25).map(|j| mixed_poisson_count_pmf(j, x, rho, &spec()).unwrap()).sum();
            let tail = mixed_poisson_tail_probability(25, x, rho, &spec()).unwrap();
            assert!((head + tail - 1.0).abs() < 1e-8, "x={x} rho={rho}: {}", head + tail);
        }
    }

    #[test]
    fn pmf_zero_is_void_probability() {
        for &(x, rho) in &[(1.0, 0.5), (0.7, 1.0), (2.0, 2.0)] {
            let p0 = mixed_poisson_count_pmf(0, x, rho, &spec()).unwrap();
            let nu = nu_survival_limit(x, rho, &spec()).unwrap();
            assert!((p0 - nu).abs() < 1e-9);
        }
    }

    #[test]
    fn pmf_truncated_mean_plus_tail_mean() {
        let (x, rho) = (1.0, 0.5);
        let j_max = 60u64;
        let partial: f64 = (0..j_max)
            .map(|j| j as f64 * mixed_poisson_count_pmf(j, x, rho, &spec()).unwrap())
            .sum();
        let tail = mixed_poisson_tail_mean(j_max, x, rho, &spec()).unwrap();
        let mean = mean_count_limit(x, rho).unwrap().finite().unwrap();
        assert!((partial + tail - mean).abs() < 1e-6, "{}", partial + tail - mean);
    }

    #[test]
    fn laplace_limits() {
        let r = Rect::origin(1.0, 1.0);
        let small = laplace_functional_limit(&r, 1e-9, 1.0, &spec()).unwrap();
        assert!((small - 1.0).abs() < 1e-8);
        let big = laplace_functional_limit(&r, 60.0, 1.0, &spec()).unwrap();
        let void = mixed_void_probability(1.0 / 3.0, 1.0, &spec()).unwrap();
        assert!((big - void).abs() < 1e-12);
        let a = laplace_functional_limit(&r, 0.5, 1.0, &spec()).unwrap();
        let b = laplace_functional_limit(&r, 1.5, 1.0, &spec()).unwrap();
        assert!(b < a);
    }

    #[test]
    fn det_intensity_examples() {
        let w = Interval::new(-1.0, 0.0).unwrap();
        let alpha = 6.0 / (PI * PI);
        let closed = det_limit_intensity(&w, alpha, 2.0).unwrap();
        let quad = det_limit_intensity_quadrature(&w, alpha, 2.0).unwrap();
        assert!((closed - quad).abs() < 1e-13);
        assert!((closed - 0.697_012_658_944_709_3).abs() < 1e-13, "{closed}");
        assert!(det_limit_intensity(&w, 1.0, 1.0).is_err());
    }

    #[test]
    fn inverse_d_rho_values() {
        assert!((expected_inv_d_rho(2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((expected_inv_d_rho(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((expected_inv_d_rho(1.5).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((expected_inv_d_rho(2.5).unwrap() - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!(expected_inv_d_rho(0.9).is_err());
        for &rho in &[1.0, 1.5, 2.0, 2.5] {
            let p = expected_inv_d_rho_truncated(rho, 10_000_000);
            let g = expected_inv_d_rho(rho).unwrap();
            assert!(((p - g) / g).abs() < 1e-6, "rho={rho}: {p} vs {g}");
        }
    }

    #[test]
    fn handle_requires_parameters() {
        assert!(LimitLawHandle::new(LawId::MixedPoissonPmf, &[("x", 1.0)]).is_err());
        let h = LimitLawHandle::new(LawId::NuSurvival, &[("rho", 1.0)]).unwrap();
        assert_eq!(h.param("rho"), Some(1.0));
    }
}
