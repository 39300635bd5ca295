//! Rare-event asymptotics for `ρ >= 1`.
//!
//! Expected numbers of empty bins among the first `k_n ~ x n^α` are sums of
//! `E e^{-n P_i}`. For `i > k = ⌊ρ⌋` the bin probability is represented as
//! `P_i ≈ ρ e^{-ρ t_k} G^ρ E / i^{ρ+1}` with `t_k` of CDF `(1-e^{-t})^k`,
//! `G ~ Gamma(k+1, 1)` and `E ~ Exp(1)` independent, so that
//! `E e^{-n P_i} = E[1 / (1 + n ρ G^ρ e^{-ρ t_k} / i^{ρ+1})]`. The `ρ` factor comes
//! from `Z_i = i(1 - e^{-ρ E_i / i}) → ρ E_i`, and `D_ρ = G^ρ`.
//!
//! The exact finite-`i` law is also available: `e^{-t_{i-1}} ~ Beta(1, i-1)` and
//! `1 - e^{-ρ E_i / i} ~ Beta(1, i/ρ)`, independent.

use std::cell::Cell;
use std::f64::consts::PI;
use std::io::Write;

use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimate::EstimateWithCI;
use crate::geometry::{ExtendedReal, Interval};
use crate::limits::{expected_inv_d_rho, tn_survival};
use crate::par::replicate;
use crate::quad::{integrate_lenient, integrate_with_breaks, QuadratureSpec, Transform};
use crate::rng::RngStream;
use crate::special::ln_gamma;
use crate::yule::{
    bin_probabilities, sample_splits_given_t_k, sample_t_k_conditional, t_k_window_mass, throw_balls, ThrowMode,
};

fn floor_rho(rho: f64) -> Result<usize> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be at least 1, got {rho}")));
    }
    Ok(rho.floor() as usize)
}

// ------------------------------------------------------------------ regimes

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeSpec {
    pub rho: f64,
    pub alpha: f64,
    pub delta: f64,
    pub a_shift: f64,
    pub x: f64,
}

impl RegimeSpec {
    pub fn validate(&self) -> Result<()> {
        let rho = self.rho;
        floor_rho(rho)?;
        let lo = 1.0 / (2.0 * rho + 1.0);
        let hi = 1.0 / (rho + 2.0);
        if !(self.alpha >= lo && self.alpha < hi) {
            return Err(invalid(format!("alpha {} outside [{lo}, {hi})", self.alpha)));
        }
        if !(self.delta >= 0.0) || !(self.x > 0.0) || !self.a_shift.is_finite() {
            return Err(invalid("need delta >= 0, x > 0 and a finite shift"));
        }
        Ok(())
    }

    /// `(1 - α(ρ+2)) / (ρ - 1)`, infinite at `ρ = 1`.
    pub fn delta0(&self) -> f64 {
        if self.rho == 1.0 {
            f64::INFINITY
        } else {
            (1.0 - self.alpha * (self.rho + 2.0)) / (self.rho - 1.0)
        }
    }

    /// `(1 - α(ρ+1)) / ρ`.
    pub fn delta1(&self) -> f64 {
        (1.0 - self.alpha * (self.rho + 1.0)) / self.rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimePrediction {
    pub case: u8,
    pub exponent: ExtendedReal,
    pub prefactor: ExtendedReal,
}

pub fn case2_exponent(rho: f64, alpha: f64, delta: f64) -> f64 {
    (rho + 2.0) * alpha + delta * (rho - 1.0) - 1.0
}

pub fn case3_exponent(rho: f64, alpha: f64) -> f64 {
    ((2.0 * rho + 1.0) * alpha - 1.0) / rho
}

/// Growth of `E(N^{p_α}_n([0,x]) 1{t_k <= δ log n + a})`.
pub fn regime_prediction(spec: &RegimeSpec) -> Result<RegimePrediction> {
    spec.validate()?;
    if spec.rho == 1.0 {
        return Err(invalid("rho = 1 has its own critical law"));
    }
    let (rho, alpha, delta, x) = (spec.rho, spec.alpha, spec.delta, spec.x);
    let k = rho.floor();
    if delta < spec.delta0() {
        return Ok(RegimePrediction {
            case: 1,
            exponent: ExtendedReal::NegInfinity,
            prefactor: ExtendedReal::Finite(0.0),
        });
    }
    if delta < spec.delta1() {
        let e_inv = expected_inv_d_rho(rho)? / rho;
        let pre = x.powf(rho + 2.0) / (rho + 2.0) * k / (rho - 1.0) * e_inv * ((rho - 1.0) * spec.a_shift).exp();
        return Ok(RegimePrediction {
            case: 2,
            exponent: ExtendedReal::Finite(case2_exponent(rho, alpha, delta)),
            prefactor: ExtendedReal::Finite(pre),
        });
    }
    let u_lo = if (delta - spec.delta1()).abs() <= 1e-12 {
        (-rho * spec.a_shift).exp()
    } else {
        0.0
    };
    let spec_q = QuadratureSpec::with_tolerance(1e-10);
    let phi = case3_integral(rho, x, u_lo, f64::INFINITY, &spec_q)?;
    Ok(RegimePrediction {
        case: 3,
        exponent: ExtendedReal::Finite(case3_exponent(rho, alpha)),
        prefactor: ExtendedReal::Finite(phi),
    })
}

/// Closed form of the case-3 prefactor over the full `u` range.
pub fn case3_constant(rho: f64, x: f64) -> f64 {
    x.powf((2.0 * rho + 1.0) / rho) * PI * rho.powf(-1.0 / rho) / ((2.0 * rho + 1.0) * (PI / rho).sin())
}

// ------------------------------------------------------- gamma expectations

/// `E f(G)` for `G ~ Gamma(k+1, 1)`.
fn gamma_expectation<F: Fn(f64) -> f64>(k: usize, f: F, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let shape = k as f64 + 1.0;
    let ln_norm = ln_gamma(shape);
    let g = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        f(x) * (k as f64 * x.ln() - x - ln_norm).exp()
    };
    let hi = shape + 12.0 * shape.sqrt() + 40.0;
    let pts = [0.0, 0.5 * shape, shape, 2.0 * shape, 4.0 * shape + 10.0, hi];
    let r = integrate_with_breaks(g, &pts, spec)?;
    Ok((r.value, r.abs_error))
}

// ----------------------------------------------------- representation terms

fn t_k_density(k: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return if k == 1 { 1.0 } else { 0.0 };
    }
    k as f64 * ((k as f64 - 1.0) * (-(-t).exp()).ln_1p() - t).exp()
}

/// `∫_lo^hi f_k(t) / (1 + c e^{-ρ t}) dt`; the second value is the error estimate.
fn t_integral(c: f64, rho: f64, k: usize, window: Interval, spec: &QuadratureSpec) -> (f64, f64) {
    let (lo, hi) = (window.lo.max(0.0), window.hi);
    if k == 1 && rho == 1.0 {
        let up = |t: f64| if t.is_finite() { (c * (-t).exp()).ln_1p() } else { 0.0 };
        return if c > 1e-12 {
            ((up(lo) - up(hi)) / c, 0.0)
        } else {
            ((-lo).exp() - if hi.is_finite() { (-hi).exp() } else { 0.0 }, 0.0)
        };
    }
    let t_star = c.ln() / rho;
    let t_end = (t_star.max(0.0) + 45.0 / rho.min(1.0)).max((k as f64).ln() + 45.0);
    let upper = hi.min(t_end);
    if upper <= lo {
        // the whole window lies where the logistic factor is 1
        return (tn_survival(k as u64, lo) - tn_survival(k as u64, hi), 0.0);
    }
    let mut pts = vec![lo];
    let mode = (k as f64).ln();
    for p in [
        t_star - 20.0 / rho,
        t_star - 5.0 / rho,
        t_star - 2.0 / rho,
        t_star,
        t_star + 2.0 / rho,
        t_star + 5.0 / rho,
        t_star + 20.0 / rho,
        mode,
        mode + 5.0,
    ] {
        if p > lo && p < upper {
            pts.push(p);
        }
    }
    pts.push(upper);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let f = |t: f64| t_k_density(k, t) / (1.0 + c * (-rho * t).exp());
    let r = integrate_lenient(f, &pts, spec).expect("valid breakpoints");
    let mut value = r.value;
    if hi > upper {
        value += tn_survival(k as u64, upper) - tn_survival(k as u64, hi);
    }
    (value, if r.converged { r.abs_error } else { r.abs_error.max(1e-3 * value.abs()) })
}

/// `E[e^{-n P_i} 1{t_k ∈ window}]` under the asymptotic representation.
pub fn representation_term(n: f64, i: usize, rho: f64, window: Interval, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let k = floor_rho(rho)?;
    if i <= k {
        return Err(invalid("representation holds for i > floor(rho)"));
    }
    let scale = n * rho / (i as f64).powf(rho + 1.0);
    let inner_err = Cell::new(0.0f64);
    let inner_spec = QuadratureSpec {
        relative_tolerance: (spec.relative_tolerance * 0.1).max(1e-13),
        ..*spec
    };
    let (v, e) = gamma_expectation(
        k,
        |g| {
            let (v, e) = t_integral(scale * g.powf(rho), rho, k, window, &inner_spec);
            inner_err.set(inner_err.get().max(e));
            v
        },
        spec,
    )?;
    Ok((v, e + inner_err.get()))
}

/// Terms `i = k+1 ..= k_max` of the representation sum with their error estimates.
pub fn representation_terms(
    n: f64,
    k_max: usize,
    rho: f64,
    window: Interval,
    spec: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    let k = floor_rho(rho)?;
    (k + 1..=k_max)
        .map(|i| representation_term(n, i, rho, window, spec))
        .collect()
}

// ------------------------------------------------------------ exact law

/// `E exp(-s V)` with `V = 1 - e^{-E/m}`, `E ~ Exp(1)`.
fn laplace_v(s: f64, m: f64, spec: &QuadratureSpec) -> (f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0);
    }
    let spec = QuadratureSpec {
        transform: Transform::ExpSubstitution,
        ..*spec
    };
    let f = |y: f64| (-y - s * (-(-y / m).exp_m1())).exp();
    let w = m / s;
    let mut pts = vec![0.0];
    for p in [w, 10.0 * w, 100.0 * w] {
        if p > 1e-14 && p < 600.0 {
            pts.push(p);
        }
    }
    pts.push(f64::INFINITY);
    let r = integrate_lenient(f, &pts, &spec).expect("valid breakpoints");
    (r.value, r.abs_error)
}

/// `E e^{-n P_i}` under the exact finite-`i` law (any `ρ > 0`).
pub fn exact_exp_term(n: f64, i: usize, rho: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(rho > 0.0) || i == 0 {
        return Err(invalid("need rho > 0 and i >= 1"));
    }
    let m = i as f64 / rho;
    let inner_spec = QuadratureSpec {
        relative_tolerance: (spec.relative_tolerance * 0.1).max(1e-13),
        ..*spec
    };
    if i == 1 {
        return Ok(laplace_v(n, m, &inner_spec));
    }
    let j = i - 1;
    let inner_err = Cell::new(0.0f64);
    let f = |t: f64| {
        let d = t_k_density(j, t);
        if d == 0.0 {
            return 0.0;
        }
        let (v, e) = laplace_v(n * (-rho * t).exp(), m, &inner_spec);
        inner_err.set(inner_err.get().max(e));
        d * v
    };
    let t_star = (n / m).ln() / rho;
    let mode = (j as f64).ln();
    let t_end = t_star.max(mode) + 45.0 / rho.min(1.0);
    let mut pts = vec![0.0];
    for p in [
        t_star - 5.0 / rho,
        t_star - 1.0 / rho,
        t_star,
        t_star + 1.0 / rho,
        t_star + 5.0 / rho,
        mode - 2.0,
        mode,
        mode + 3.0,
        mode + 10.0,
    ] {
        if p > 0.0 && p < t_end {
            pts.push(p);
        }
    }
    pts.push(t_end);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let r = integrate_with_breaks(f, &pts, spec)?;
    let tail = tn_survival(j as u64, t_end);
    Ok((r.value + tail, r.abs_error + inner_err.get()))
}

/// `Σ_{i=lo}^{hi} E e^{-n P_i}` under the exact law.
pub fn exact_exp_sum(n: f64, lo: usize, hi: usize, rho: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let mut v = 0.0;
    let mut e = 0.0;
    for i in lo..=hi {
        let (a, b) = exact_exp_term(n, i, rho, spec)?;
        v += a;
        e += b;
    }
    Ok((v, e))
}

// --------------------------------------------------------------- mc oracle

/// Per-term direct simulation of `E[e^{-n P_i} 1{t_k ∈ window}]`, `i = k+1 ..= k_max`,
/// plus the estimate of their sum.
pub fn mc_oracle_terms(
    n: f64,
    k_max: usize,
    rho: f64,
    window: Interval,
    replications: usize,
    seed: u64,
) -> Result<(Vec<EstimateWithCI>, EstimateWithCI)> {
    let k = floor_rho(rho)?;
    if k_max <= k || replications < 2 {
        return Err(invalid("need k_max > floor(rho) and at least two replications"));
    }
    let mass = t_k_window_mass(k, window);
    if !(mass > 0.0) {
        return Err(invalid("window has zero mass"));
    }
    let n_terms = k_max - k;
    const CHUNK: usize = 1000;
    let chunks = replications.div_ceil(CHUNK);
    let parts = replicate(chunks, |c| {
        let mut sums = vec![0.0; n_terms];
        let mut sq = vec![0.0; n_terms];
        let (mut tot, mut tot_sq) = (0.0, 0.0);
        let start = c as usize * CHUNK;
        for r in start..(start + CHUNK).min(replications) {
            let mut rng = RngStream::new(seed, r as u64).rng();
            let mut t = sample_t_k_conditional(k, window, &mut rng).expect("window checked");
            let mut total = 0.0;
            for (idx, i) in (k + 1..=k_max).enumerate() {
                let e: f64 = Exp1.sample(&mut rng);
                let fi = i as f64;
                let p = (-rho * t).exp() * (-(-rho * e / fi).exp_m1());
                let v = (-n * p).exp();
                sums[idx] += v;
                sq[idx] += v * v;
                total += v;
                t += e / fi;
            }
            tot += total;
            tot_sq += total * total;
        }
        (sums, sq, tot, tot_sq)
    });
    let mut sums = vec![0.0; n_terms];
    let mut sq = vec![0.0; n_terms];
    let (mut tot, mut tot_sq) = (0.0, 0.0);
    for (s, q, t, tq) in parts {
        for j in 0..n_terms {
            sums[j] += s[j];
            sq[j] += q[j];
        }
        tot += t;
        tot_sq += tq;
    }
    let r = replications as f64;
    let est = |s: f64, q: f64| {
        let mean = s / r;
        let var = ((q - r * mean * mean) / (r - 1.0)).max(0.0);
        EstimateWithCI {
            value: mean * mass,
            stderr: (var / r).sqrt() * mass,
            n_replications: replications,
            seed,
            method: "mc-oracle".into(),
        }
    };
    let terms = (0..n_terms).map(|j| est(sums[j], sq[j])).collect();
    Ok((terms, est(tot, tot_sq)))
}

// ------------------------------------------------------------- public sums

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Quadrature,
    McOracle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Quadrature,
    McOracle { replications: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectedCountResult {
    pub value: f64,
    pub method: MethodTag,
    pub error_estimate: f64,
    pub n: f64,
}

fn default_spec() -> QuadratureSpec {
    QuadratureSpec::with_tolerance(1e-9)
}

/// Relative bias of the representation against the exact law at probe indices
/// `k+1, k+2, k+4, ...`, extended as `1/i` beyond the last probe. The relative bias is
/// measured without conditioning and applied to the windowed terms.
fn representation_bias(n: f64, k_max: usize, rho: f64, window: Interval, terms: &[(f64, f64)]) -> Result<f64> {
    let k = rho.floor() as usize;
    let spec = default_spec();
    let mut probes = Vec::new();
    let mut step = 1;
    while k + step <= k_max && probes.len() < 8 {
        probes.push(k + step);
        step *= 2;
    }
    let mut rel = Vec::with_capacity(probes.len());
    let full = Interval::positive_half_line();
    for &p in &probes {
        let rep = if window == full {
            terms[p - k - 1].0
        } else {
            representation_term(n, p, rho, full, &spec)?.0
        };
        let (ex, _) = exact_exp_term(n, p, rho, &spec)?;
        rel.push(if ex > 0.0 { (rep - ex).abs() / ex } else { 0.0 });
    }
    let mut bias = 0.0;
    for (idx, &(v, _)) in terms.iter().enumerate() {
        let i = k + 1 + idx;
        let j = probes.partition_point(|&p| p <= i) - 1;
        let r = if j + 1 == probes.len() {
            rel[j] * probes[j] as f64 / i as f64
        } else {
            rel[j]
        };
        bias += r * v;
    }
    Ok(bias)
}

fn quadrature_sum(n: f64, k_max: usize, rho: f64, window: Interval) -> Result<ExpectedCountResult> {
    let terms = representation_terms(n, k_max, rho, window, &default_spec())?;
    let value: f64 = terms.iter().map(|t| t.0).sum();
    let quad_err: f64 = terms.iter().map(|t| t.1).sum();
    let bias = if terms.is_empty() {
        0.0
    } else {
        representation_bias(n, k_max, rho, window, &terms)?
    };
    Ok(ExpectedCountResult {
        value,
        method: MethodTag::Quadrature,
        error_estimate: quad_err + bias,
        n,
    })
}

fn windowed(n: f64, k_max: usize, rho: f64, window: Interval, method: Method) -> Result<ExpectedCountResult> {
    let k = floor_rho(rho)?;
    if !(n >= 1.0) {
        return Err(invalid("n must be at least 1"));
    }
    if k_max <= k {
        return Ok(ExpectedCountResult {
            value: 0.0,
            method: match method {
                Method::Quadrature => MethodTag::Quadrature,
                Method::McOracle { .. } => MethodTag::McOracle,
            },
            error_estimate: 0.0,
            n,
        });
    }
    match method {
        Method::Quadrature => quadrature_sum(n, k_max, rho, window),
        Method::McOracle { replications, seed } => {
            let (_, total) = mc_oracle_terms(n, k_max, rho, window, replications, seed)?;
            Ok(ExpectedCountResult {
                value: total.value,
                method: MethodTag::McOracle,
                error_estimate: total.stderr,
                n,
            })
        }
    }
}

/// `Σ_{i=⌊ρ⌋+1}^{k_max} E e^{-n P_i}`.
pub fn expected_exp_sum(n: f64, k_max: usize, rho: f64, method: Method) -> Result<ExpectedCountResult> {
    windowed(n, k_max, rho, Interval::positive_half_line(), method)
}

/// `Σ E(e^{-n P_i} 1{t_⌊ρ⌋ <= b})`.
pub fn conditioned_exp_sum(n: f64, k_max: usize, rho: f64, b: f64, method: Method) -> Result<ExpectedCountResult> {
    if !(b > 0.0) {
        return Err(invalid("b must be positive"));
    }
    windowed(n, k_max, rho, Interval { lo: 0.0, hi: b }, method)
}

/// `Σ E(e^{-n P_i} 1{t_⌊ρ⌋ ∈ window})`.
pub fn windowed_exp_sum(
    n: f64,
    k_max: usize,
    rho: f64,
    window: Interval,
    method: Method,
) -> Result<ExpectedCountResult> {
    windowed(n, k_max, rho, window, method)
}

/// Fails when the two results differ by more than `z` combined error bars.
pub fn cross_validate(quad: &ExpectedCountResult, mc: &ExpectedCountResult, z: f64) -> Result<()> {
    let tol = z * (quad.error_estimate.powi(2) + mc.error_estimate.powi(2)).sqrt();
    if (quad.value - mc.value).abs() > tol {
        return Err(Error::MethodDisagreement {
            quadrature: quad.value,
            mc_oracle: mc.value,
            tolerance: tol,
        });
    }
    Ok(())
}

// -------------------------------------------------------------------- psi

/// `H(y) = ∫_0^1 v^{ρ+1} / (v^{ρ+1} + y) dv`.
fn h_inner(y: f64, rho: f64, spec: &QuadratureSpec) -> f64 {
    let p = rho + 1.0;
    let f = |v: f64| {
        let a = v.powf(p);
        a / (a + y)
    };
    let vs = y.powf(1.0 / p);
    let pts: Vec<f64> = if vs > 1e-8 && vs < 1.0 {
        vec![0.0, vs, 1.0]
    } else {
        vec![0.0, 1.0]
    };
    integrate_lenient(f, &pts, spec).expect("valid breakpoints").value
}

/// `F(Y) = ∫_0^Y y^{1/ρ-1} H(y) dy`.
fn f_cumulative(big_y: f64, rho: f64, spec: &QuadratureSpec) -> f64 {
    if big_y <= 0.0 {
        return 0.0;
    }
    if big_y == f64::INFINITY {
        return PI / (PI / rho).sin() * rho / (2.0 * rho + 1.0);
    }
    let s_top = big_y.ln();
    let s_lo = s_top.min(-40.0);
    // below s_lo, H = 1 up to negligible terms
    let head = rho * (s_lo / rho).exp();
    if s_top <= s_lo {
        return head;
    }
    let f = |s: f64| (s / rho).exp() * h_inner(s.exp(), rho, spec);
    let mut pts = vec![s_lo];
    for p in [-10.0, -3.0, 0.0, 3.0, 10.0] {
        if p > s_lo && p < s_top {
            pts.push(p);
        }
    }
    pts.push(s_top);
    head + integrate_lenient(f, &pts, spec).expect("valid breakpoints").value
}

/// `x^{(2ρ+1)/ρ} (⌊ρ⌋/ρ) ∫_{u_lo}^{u_hi} u^{1/ρ-1} ∫_0^1 E[v^{ρ+1} / (v^{ρ+1} + u ρ D_ρ)] dv du`.
pub fn case3_integral(rho: f64, x: f64, u_lo: f64, u_hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    let k = floor_rho(rho)?;
    if !(rho > 1.0) {
        return Err(invalid("the case-3 integral needs rho > 1"));
    }
    if !(u_lo >= 0.0 && u_hi > u_lo) {
        return Err(invalid("need 0 <= u_lo < u_hi"));
    }
    let pre = x.powf((2.0 * rho + 1.0) / rho) * k as f64 / rho;
    if u_lo == 0.0 && u_hi == f64::INFINITY {
        return Ok(case3_constant(rho, x));
    }
    let inner = QuadratureSpec {
        relative_tolerance: (spec.relative_tolerance * 0.01).max(1e-13),
        ..*spec
    };
    let (v, _) = gamma_expectation(
        k,
        |g| {
            let c = rho * g.powf(rho);
            let hi = if u_hi == f64::INFINITY { f64::INFINITY } else { c * u_hi };
            c.powf(-1.0 / rho) * (f_cumulative(hi, rho, &inner) - f_cumulative(c * u_lo, rho, &inner))
        },
        spec,
    )?;
    Ok(pre * v)
}

/// `ψ(y, z)`: share of the case-3 integral carried by `t_k - δ1 log n ∈ [y, z]`.
pub fn psi_ratio(y: f64, z: f64, rho: f64, x: f64) -> Result<f64> {
    if !(y < z) || y.is_nan() || z.is_nan() {
        return Err(invalid("need y < z"));
    }
    let spec = QuadratureSpec::with_tolerance(1e-11);
    let u_lo = if z == f64::INFINITY { 0.0 } else { (-rho * z).exp() };
    let u_hi = if y == f64::NEG_INFINITY { f64::INFINITY } else { (-rho * y).exp() };
    let num = case3_integral(rho, x, u_lo, u_hi, &spec)?;
    Ok(num / case3_constant(rho, x))
}

// ------------------------------------------------------------- rho = 1

/// `(min(a, 1/3) / 3) x³ E(1/D_1)`.
pub fn rho1_conditioned_limit(a: f64, x: f64) -> f64 {
    let e_inv = 1.0;
    a.clamp(0.0, 1.0 / 3.0) / 3.0 * x.powi(3) * e_inv
}

// ------------------------------------------------------ poissonization

/// `2 e² ⌊x φ(n)⌋ / n`.
pub fn poissonization_gap_bound(n: f64, phi_n: f64, x: f64) -> f64 {
    2.0 * (2.0f64).exp() * (x * phi_n).floor() / n
}

// ---------------------------------------------------- conditioned simulation

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionalOccupancy {
    pub n: u64,
    pub rho: f64,
    pub alpha: f64,
    pub x: f64,
    pub window: Interval,
    pub replications: usize,
    pub seed: u64,
}

/// Unbiased estimate of `E(N^{p_α}_n([0,x]) 1{t_⌊ρ⌋ ∈ window})` by poissonized simulation.
pub fn conditional_occupancy_experiment(cfg: &ConditionalOccupancy) -> Result<EstimateWithCI> {
    let k = floor_rho(cfg.rho)?;
    let mass = t_k_window_mass(k, cfg.window);
    if !(mass > 0.0) {
        return Err(invalid("window has zero mass"));
    }
    if cfg.replications < 2 {
        return Err(invalid("need at least two replications"));
    }
    let limit = (cfg.x * (cfg.n as f64).powf(cfg.alpha)).floor() as usize;
    let n_bins = limit.max(k + 1);
    let values = replicate(cfg.replications, |r| {
        let mut rng = RngStream::new(cfg.seed, r).rng();
        let t = sample_t_k_conditional(k, cfg.window, &mut rng).expect("window checked");
        let splits = sample_splits_given_t_k(n_bins, k, t, &mut rng).expect("valid conditioning");
        let pv = bin_probabilities(&splits, cfg.rho).expect("rho checked");
        let occ = throw_balls(&pv, cfg.n, ThrowMode::Poissonized, &mut rng);
        occ.level_count_upto(0, limit) as f64
    });
    Ok(EstimateWithCI::from_samples(&values, cfg.seed, "mc").scaled(mass))
}

// --------------------------------------------------------------- output

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RareRow {
    pub n: f64,
    pub alpha: f64,
    pub delta: f64,
    pub method: MethodTag,
    pub value: f64,
    pub error_estimate: f64,
    pub seed: u64,
}

pub fn write_rare_csv<W: Write>(rows: &[RareRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_example() {
        let s = RegimeSpec {
            rho: 2.0,
            alpha: 0.22,
            delta: 0.25,
            a_shift: 0.0,
            x: 1.0,
        };
        assert!((s.delta0() - 0.12).abs() < 1e-12);
        assert!((s.delta1() - 0.17).abs() < 1e-12);
        let p = regime_prediction(&s).unwrap();
        assert_eq!(p.case, 3);
        assert!((p.exponent.finite().unwrap() - 0.05).abs() < 1e-12);
        assert!((p.prefactor.finite().unwrap() - case3_constant(2.0, 1.0)).abs() < 1e-12);
        let left = RegimeSpec { alpha: 0.2, ..s };
        assert!(regime_prediction(&left).unwrap().exponent.finite().unwrap().abs() < 1e-12);
    }

    #[test]
    fn cases_one_and_two() {
        let base = RegimeSpec {
            rho: 2.0,
            alpha: 0.22,
            delta: 0.06,
            a_shift: 0.0,
            x: 1.0,
        };
        let p1 = regime_prediction(&base).unwrap();
        assert_eq!((p1.case, p1.exponent), (1, ExtendedReal::NegInfinity));
        let p2 = regime_prediction(&RegimeSpec { delta: 0.14, ..base }).unwrap();
        assert_eq!(p2.case, 2);
        assert!((p2.exponent.finite().unwrap() - 0.02).abs() < 1e-12);
        assert!(regime_prediction(&RegimeSpec { rho: 1.0, alpha: 0.3, ..base }).is_err());
        assert!(regime_prediction(&RegimeSpec { alpha: 0.3, ..base }).is_err());
    }

    #[test]
    fn exponents_continuous_at_delta1() {
        for i in 0..20 {
            let rho = 1.1 + 0.2 * i as f64;
            for j in 0..10 {
                let lo = 1.0 / (2.0 * rho + 1.0);
                let hi = 1.0 / (rho + 2.0);
                let alpha = lo + (hi - lo) * j as f64 / 10.0;
                let d1 = (1.0 - alpha * (rho + 1.0)) / rho;
                assert!((case2_exponent(rho, alpha, d1) - case3_exponent(rho, alpha)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn case3_constant_matches_quadrature() {
        let spec = QuadratureSpec::with_tolerance(1e-10);
        for &rho in &[1.5, 2.0, 2.5] {
            let full = case3_constant(rho, 1.0);
            let split = case3_integral(rho, 1.0, 0.0, 1.0, &spec).unwrap()
                + case3_integral(rho, 1.0, 1.0, f64::INFINITY, &spec).unwrap();
            assert!(((split - full) / full).abs() < 1e-8, "rho={rho}: {split} vs {full}");
        }
        assert!((case3_constant(2.0, 1.0) - 0.444_288_293_815_836_6).abs() < 1e-12);
    }

    #[test]
    fn rho1_limit_examples() {
        assert!((rho1_conditioned_limit(1.0 / 3.0, 1.0) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(rho1_conditioned_limit(0.0, 1.0), 0.0);
        assert!((rho1_conditioned_limit(1.0 / 6.0, 1.0) - 1.0 / 18.0).abs() < 1e-15);
        assert!((rho1_conditioned_limit(5.0, 2.0) - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gap_bound_examples() {
        assert_eq!(poissonization_gap_bound(1e6, 0.5, 1.0), 0.0);
        assert!((poissonization_gap_bound(1e6, 100.0, 1.0) - 1.4778e-3).abs() < 1e-7);
        assert!(poissonization_gap_bound(1e7, 100.0, 1.0) <= poissonization_gap_bound(1e6, 100.0, 1.0));
    }

    #[test]
    fn empty_sum_below_floor_rho() {
        let r = expected_exp_sum(1e6, 2, 2.0, Method::Quadrature).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn terms_in_unit_interval_and_sum_monotone() {
        let spec = default_spec();
        let terms = representation_terms(1e6, 30, 2.0, Interval::positive_half_line(), &spec).unwrap();
        assert!(terms.iter().all(|t| t.0 > 0.0 && t.0 < 1.0));
        let mut acc = 0.0;
        for t in &terms {
            assert!(acc + t.0 >= acc);
            acc += t.0;
        }
    }

    #[test]
    fn closed_form_inner_matches_quadrature() {
        // the rho = 1 shortcut against the generic path, through a nearby rho
        let w = Interval::positive_half_line();
        let spec = QuadratureSpec::with_tolerance(1e-11);
        let (a, _) = t_integral(50.0, 1.0, 1, w, &spec);
        let (b, _) = t_integral(50.0, 1.0 + 1e-9, 1, w, &spec);
        assert!((a - b).abs() < 1e-7, "{a} {b}");
    }

    #[test]
    fn window_limits() {
        let full = expected_exp_sum(1e6, 20, 2.0, Method::Quadrature).unwrap().value;
        let big_b = conditioned_exp_sum(1e6, 20, 2.0, 200.0, Method::Quadrature).unwrap().value;
        assert!(((big_b - full) / full).abs() < 1e-8);
        let tiny_b = conditioned_exp_sum(1e6, 20, 2.0, 1e-6, Method::Quadrature).unwrap().value;
        assert!(tiny_b < 1e-10);
    }

    #[test]
    fn psi_set_function() {
        let total = psi_ratio(f64::NEG_INFINITY, f64::INFINITY, 2.0, 1.0).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        let a = psi_ratio(-1.0, 0.3, 2.0, 1.0).unwrap();
        let b = psi_ratio(0.3, 1.0, 2.0, 1.0).unwrap();
        let c = psi_ratio(-1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(a > 0.0 && b > 0.0);
        assert!((a + b - c).abs() < 1e-9, "{}", a + b - c);
        let c2 = psi_ratio(-1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((c - c2).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_power() {
        let xs = [1e5, 1e6, 1e7, 1e8];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.05)).collect();
        let (s, b) = log_log_slope(&xs, &ys);
        assert!((s - 0.05).abs() < 1e-12 && (b - 3f64.ln()).abs() < 1e-10);
    }
}
