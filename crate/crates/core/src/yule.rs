//! Exact sampling of the Yule-bin occupancy model.
//!
//! Indices are 1-based in the documentation and 0-based in storage: `probs[i - 1]`
//! is the probability of bin `i`, the interval `(t_{i-1}, t_i]` with `t_0 = 0`.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimate::compensated_sum;
use crate::geometry::{Interval, Rect};
use crate::limits::{tn_cdf, tn_survival};
use crate::special::one_minus_exp_neg;

// ---------------------------------------------------------------- split times

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitSequence {
    pub increments: Vec<f64>,
    pub times: Vec<f64>,
    pub martingale: Vec<f64>,
}

impl SplitSequence {
    fn from_increments(increments: Vec<f64>) -> Self {
        let mut times = Vec::with_capacity(increments.len());
        // compensated running sum keeps large-index martingale values accurate
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for (k, &e) in increments.iter().enumerate() {
            let y = e / (k + 1) as f64 - c;
            let t = sum + y;
            c = (t - sum) - y;
            sum = t;
            times.push(sum);
        }
        let martingale = times
            .iter()
            .enumerate()
            .map(|(k, &t)| t - ((k + 1) as f64).ln())
            .collect();
        Self {
            increments,
            times,
            martingale,
        }
    }

    pub fn n_bins(&self) -> usize {
        self.times.len()
    }

    /// `t_i` with `t_0 = 0`.
    pub fn time(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.times[i - 1]
        }
    }

    /// `e^{-M_N}` at the last index, the stand-in for `W_∞`.
    pub fn w_surrogate(&self) -> f64 {
        (-self.martingale[self.martingale.len() - 1]).exp()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "increment", "time", "martingale"])?;
        for i in 0..self.n_bins() {
            w.serialize((i + 1, self.increments[i], self.times[i], self.martingale[i]))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }
}

pub fn sample_splits<R: Rng + ?Sized>(n_bins: usize, rng: &mut R) -> Result<SplitSequence> {
    if n_bins == 0 {
        return Err(invalid("n_bins must be at least 1"));
    }
    let increments = (0..n_bins).map(|_| Exp1.sample(rng)).collect();
    Ok(SplitSequence::from_increments(increments))
}

/// Splits conditioned on a given value of `t_k`.
///
/// Given `t_k = T`, the earlier times are `T` minus the order statistics of `k - 1`
/// exponentials truncated to `(0, T)`; increments beyond `k` are unconditioned.
pub fn sample_splits_given_t_k<R: Rng + ?Sized>(
    n_bins: usize,
    k: usize,
    t_k: f64,
    rng: &mut R,
) -> Result<SplitSequence> {
    if k == 0 || n_bins < k || !(t_k > 0.0) {
        return Err(invalid("need 1 <= k <= n_bins and t_k > 0"));
    }
    let mass = one_minus_exp_neg(t_k);
    let mut gaps: Vec<f64> = (0..k - 1)
        .map(|_| {
            let u: f64 = rng.random();
            -(-u * mass).ln_1p()
        })
        .collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // t_{k-j} = T - gaps[j-1]
    let mut times_head = vec![0.0; k];
    times_head[k - 1] = t_k;
    for j in 1..k {
        times_head[k - 1 - j] = t_k - gaps[j - 1];
    }
    let mut increments = Vec::with_capacity(n_bins);
    let mut prev = 0.0;
    for (idx, &t) in times_head.iter().enumerate() {
        increments.push((t - prev) * (idx + 1) as f64);
        prev = t;
    }
    for _ in k..n_bins {
        increments.push(Exp1.sample(rng));
    }
    Ok(SplitSequence::from_increments(increments))
}

// ---------------------------------------------------------- probability vector

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    Yule,
    DeterministicPowerLaw,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ProbSource {
    /// Split times, used to place balls by their exponential locations.
    Yule { times: Vec<f64> },
    DeterministicPowerLaw { alpha_coeff: f64, delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinProbabilityVector {
    pub rho: f64,
    pub probs: Vec<f64>,
    pub tail_mass: f64,
    /// `W_i = i e^{-t_{i-1}}`, so `P_i = W_i^ρ Z_i / i^{ρ+1}` holds exactly.
    pub w_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub source: ProbSource,
}

impl BinProbabilityVector {
    pub fn n_bins(&self) -> usize {
        self.probs.len()
    }

    pub fn source_tag(&self) -> SourceTag {
        match self.source {
            ProbSource::Yule { .. } => SourceTag::Yule,
            ProbSource::DeterministicPowerLaw { .. } => SourceTag::DeterministicPowerLaw,
        }
    }

    /// `Σ probs + tail_mass`, compensated.
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().rev().copied().chain(std::iter::once(self.tail_mass)))
    }

    /// `W_i^ρ Z_i / i^{ρ+1}` for 1-based `i` (Yule source only).
    pub fn decomposed(&self, i: usize) -> f64 {
        let fi = i as f64;
        self.w_values[i - 1].powf(self.rho) * self.z_values[i - 1] / fi.powf(self.rho + 1.0)
    }

    /// `e^{-M_N}` at the last split time, the stand-in for `W_∞`.
    pub fn w_surrogate(&self) -> Option<f64> {
        match &self.source {
            ProbSource::Yule { times } => {
                let n = times.len();
                Some((-(times[n - 1] - (n as f64).ln())).exp())
            }
            ProbSource::DeterministicPowerLaw { .. } => None,
        }
    }
}

pub fn bin_probabilities(splits: &SplitSequence, rho: f64) -> Result<BinProbabilityVector> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be positive, got {rho}")));
    }
    let n = splits.n_bins();
    let mut probs = Vec::with_capacity(n);
    let mut w_values = Vec::with_capacity(n);
    let mut z_values = Vec::with_capacity(n);
    for i in 1..=n {
        let fi = i as f64;
        let t_prev = splits.time(i - 1);
        let v = one_minus_exp_neg(rho * splits.increments[i - 1] / fi);
        probs.push((-rho * t_prev).exp() * v);
        w_values.push((fi.ln() - t_prev).exp());
        z_values.push(fi * v);
    }
    Ok(BinProbabilityVector {
        rho,
        probs,
        tail_mass: (-rho * splits.time(n)).exp(),
        w_values,
        z_values,
        source: ProbSource::Yule {
            times: splits.times.clone(),
        },
    })
}

/// `Σ_{i > m} i^{-δ}` by explicit summation up to 64 and Euler–Maclaurin beyond.
pub fn power_tail(delta: f64, m: usize) -> f64 {
    let k = m.max(64);
    let explicit = compensated_sum((m + 1..=k).rev().map(|i| (i as f64).powf(-delta)));
    let kf = k as f64;
    let d = delta;
    let em = kf.powf(1.0 - d) / (d - 1.0) - 0.5 * kf.powf(-d) + d * kf.powf(-d - 1.0) / 12.0
        - d * (d + 1.0) * (d + 2.0) * kf.powf(-d - 3.0) / 720.0
        + d * (d + 1.0) * (d + 2.0) * (d + 3.0) * (d + 4.0) * kf.powf(-d - 5.0) / 30_240.0;
    explicit + em
}

/// `Q_i ∝ α / i^δ`, normalized with its analytic tail; the normalization removes `α`.
pub fn deterministic_power_law(alpha_coeff: f64, delta: f64, n_bins: usize) -> Result<BinProbabilityVector> {
    if !(delta > 1.0) {
        return Err(invalid(format!("delta must exceed 1, got {delta}")));
    }
    if !(alpha_coeff > 0.0) || n_bins == 0 {
        return Err(invalid("alpha_coeff must be positive and n_bins at least 1"));
    }
    let head = compensated_sum((1..=n_bins).rev().map(|i| (i as f64).powf(-delta)));
    let tail = power_tail(delta, n_bins);
    let zeta = head + tail;
    Ok(BinProbabilityVector {
        rho: f64::NAN,
        probs: (1..=n_bins).map(|i| (i as f64).powf(-delta) / zeta).collect(),
        tail_mass: tail / zeta,
        w_values: Vec::new(),
        z_values: Vec::new(),
        source: ProbSource::DeterministicPowerLaw { alpha_coeff, delta },
    })
}

// ------------------------------------------------------------------- balls

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThrowMode {
    Exact,
    Poissonized,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyCounts {
    pub counts: Vec<u64>,
    pub tail_count: u64,
    pub n_balls_requested: u64,
    pub mode: ThrowMode,
    pub realized_total: u64,
}

impl OccupancyCounts {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Number of bins among `1..=limit` holding exactly `level` balls.
    pub fn level_count_upto(&self, level: u64, limit: usize) -> usize {
        self.counts[..limit.min(self.counts.len())]
            .iter()
            .filter(|&&c| c == level)
            .count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "count"])?;
        for (i, c) in self.counts.iter().enumerate() {
            w.serialize((i + 1, c))?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }
}

fn place_exact<R: Rng + ?Sized>(pv: &BinProbabilityVector, counts: &mut [u64], tail: &mut u64, balls: u64, rng: &mut R) {
    match &pv.source {
        ProbSource::Yule { times } => {
            for _ in 0..balls {
                let loc: f64 = Exp1.sample(rng);
                let loc = loc / pv.rho;
                let j = times.partition_point(|&t| t < loc);
                if j < counts.len() {
                    counts[j] += 1;
                } else {
                    *tail += 1;
                }
            }
        }
        ProbSource::DeterministicPowerLaw { .. } => {
            let mut acc = 0.0;
            let cum: Vec<f64> = pv
                .probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            for _ in 0..balls {
                let u: f64 = rng.random();
                let j = cum.partition_point(|&c| c <= u);
                if j < counts.len() {
                    counts[j] += 1;
                } else {
                    *tail += 1;
                }
            }
        }
    }
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda > 0.0 {
        match Poisson::new(lambda) {
            Ok(d) => d.sample(rng) as u64,
            Err(_) => lambda.round() as u64,
        }
    } else {
        0
    }
}

pub fn throw_balls<R: Rng + ?Sized>(
    pv: &BinProbabilityVector,
    n_balls: u64,
    mode: ThrowMode,
    rng: &mut R,
) -> OccupancyCounts {
    let mut counts = vec![0u64; pv.n_bins()];
    let mut tail_count = 0u64;
    match mode {
        ThrowMode::Exact => place_exact(pv, &mut counts, &mut tail_count, n_balls, rng),
        ThrowMode::Poissonized => {
            let n = n_balls as f64;
            for (c, p) in counts.iter_mut().zip(&pv.probs) {
                *c = poisson(n * p, rng);
            }
            tail_count = poisson(n * pv.tail_mass, rng);
        }
    }
    let realized_total = counts.iter().sum::<u64>() + tail_count;
    OccupancyCounts {
        counts,
        tail_count,
        n_balls_requested: n_balls,
        mode,
        realized_total,
    }
}

/// Adds `extra` balls to an exact-mode realization over the same vector.
pub fn throw_additional<R: Rng + ?Sized>(
    occ: &mut OccupancyCounts,
    pv: &BinProbabilityVector,
    extra: u64,
    rng: &mut R,
) -> Result<()> {
    if occ.mode != ThrowMode::Exact || occ.n_bins() != pv.n_bins() {
        return Err(invalid("additional balls need an exact-mode realization of the same vector"));
    }
    place_exact(pv, &mut occ.counts, &mut occ.tail_count, extra, rng);
    occ.n_balls_requested += extra;
    occ.realized_total += extra;
    Ok(())
}

// ---------------------------------------------------------- point processes

/// `φ(n) = multiplier · n^exponent · (log n)^{-log_power}`; index `i` maps to `i/φ(n) - shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleDescriptor {
    pub n: u64,
    pub exponent: f64,
    pub log_power: f64,
    pub multiplier: f64,
    pub shift: f64,
}

impl ScaleDescriptor {
    pub fn power(n: u64, exponent: f64) -> Self {
        Self {
            n,
            exponent,
            log_power: 0.0,
            multiplier: 1.0,
            shift: 0.0,
        }
    }

    pub fn with_log_power(self, log_power: f64) -> Self {
        Self { log_power, ..self }
    }

    pub fn with_affine(self, multiplier: f64, shift: f64) -> Self {
        Self {
            multiplier,
            shift,
            ..self
        }
    }

    pub fn phi(&self) -> f64 {
        let n = self.n as f64;
        let mut phi = self.multiplier * n.powf(self.exponent);
        if self.log_power != 0.0 {
            phi *= n.ln().powf(-self.log_power);
        }
        phi
    }

    pub fn map(&self, i: usize) -> f64 {
        i as f64 / self.phi() - self.shift
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ScaledPointProcess {
    Line { points: Vec<f64>, scale: ScaleDescriptor },
    Plane { points: Vec<(f64, f64)>, scale: ScaleDescriptor },
}

impl ScaledPointProcess {
    pub fn dimension(&self) -> usize {
        match self {
            ScaledPointProcess::Line { .. } => 1,
            ScaledPointProcess::Plane { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ScaledPointProcess::Line { points, .. } => points.len(),
            ScaledPointProcess::Plane { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in the interval (1-D) or with abscissa in it (2-D).
    pub fn count_in(&self, iv: &Interval) -> usize {
        match self {
            ScaledPointProcess::Line { points, .. } => {
                points.partition_point(|&p| p <= iv.hi) - points.partition_point(|&p| p < iv.lo)
            }
            ScaledPointProcess::Plane { points, .. } => points.iter().filter(|p| iv.contains(p.0)).count(),
        }
    }

    pub fn count_in_rect(&self, rect: &Rect) -> usize {
        match self {
            ScaledPointProcess::Line { points, .. } => points.iter().filter(|&&p| rect.x0 <= p && p <= rect.x1).count(),
            ScaledPointProcess::Plane { points, .. } => points.iter().filter(|p| rect.contains(p.0, p.1)).count(),
        }
    }
}

/// Scaled indices of the bins holding exactly `level` balls.
pub fn empty_bin_process(occ: &OccupancyCounts, level: u64, scale: ScaleDescriptor) -> Result<ScaledPointProcess> {
    if !(scale.exponent > 0.0) {
        return Err(invalid("scale exponent must be positive"));
    }
    let points = occ
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == level)
        .map(|(i, _)| scale.map(i + 1))
        .collect();
    Ok(ScaledPointProcess::Line { points, scale })
}

pub fn first_empty_index(occ: &OccupancyCounts) -> Result<usize> {
    occ.counts
        .iter()
        .position(|&c| c == 0)
        .map(|p| p + 1)
        .ok_or(Error::NoEmptyBin { n_bins: occ.n_bins() })
}

/// Pairs `(i / n^{1/(ρ+2)}, n P_i)`.
pub fn two_dim_process(pv: &BinProbabilityVector, n: u64) -> Result<ScaledPointProcess> {
    if pv.source_tag() != SourceTag::Yule {
        return Err(invalid("two-dimensional process needs a Yule vector"));
    }
    let scale = ScaleDescriptor::power(n, 1.0 / (pv.rho + 2.0));
    let nf = n as f64;
    let points = pv
        .probs
        .iter()
        .enumerate()
        .map(|(i, p)| (scale.map(i + 1), nf * p))
        .collect();
    Ok(ScaledPointProcess::Plane { points, scale })
}

// ------------------------------------------------------- conditional samplers

/// `t_k` conditioned on `t_k ∈ window`, by inversion of `(1 - e^{-x})^k`.
pub fn sample_t_k_conditional<R: Rng + ?Sized>(k: usize, window: Interval, rng: &mut R) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let (a, b) = (window.lo.max(0.0), window.hi);
    if !(b > a) {
        return Err(invalid("empty window"));
    }
    let fa = tn_cdf(k as u64, a);
    let u: f64 = rng.random();
    let x = if fa < 0.5 {
        let fb = tn_cdf(k as u64, b);
        let mass = fb - fa;
        if !(mass > 0.0) {
            return Err(invalid("window has zero mass"));
        }
        let v = fa + u * mass;
        -(-(v.ln() / k as f64).exp_m1()).ln()
    } else {
        let (sa, sb) = (tn_survival(k as u64, a), tn_survival(k as u64, b));
        let mass = sa - sb;
        if !(mass > 0.0) {
            return Err(invalid("window has zero mass"));
        }
        let s = sb + u * mass;
        -(-((-s).ln_1p() / k as f64).exp_m1()).ln()
    };
    Ok(x.clamp(a, b))
}

/// Probability of `t_k ∈ window`.
pub fn t_k_window_mass(k: usize, window: Interval) -> f64 {
    let (a, b) = (window.lo.max(0.0), window.hi);
    let fa = tn_cdf(k as u64, a);
    if fa < 0.5 {
        tn_cdf(k as u64, b) - fa
    } else {
        tn_survival(k as u64, a) - tn_survival(k as u64, b)
    }
}

fn floor_rho(rho: f64) -> Result<usize> {
    if !(rho >= 1.0 && rho.is_finite()) {
        return Err(invalid(format!("rho must be at least 1, got {rho}")));
    }
    Ok(rho.floor() as usize)
}

/// `D_ρ` through the identity `D_ρ = G^ρ`, `G ~ Gamma(⌊ρ⌋ + 1, 1)`.
pub fn sample_d_rho<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<f64> {
    let k = floor_rho(rho)?;
    let g = Gamma::new(k as f64 + 1.0, 1.0).map_err(|e| invalid(e.to_string()))?;
    let x: f64 = g.sample(rng);
    Ok(x.powf(rho))
}

/// `exp(-ρ [M_N - M_k - log k])` from `N - k` fresh increments.
pub fn sample_d_rho_truncated<R: Rng + ?Sized>(rho: f64, n_terms: usize, rng: &mut R) -> Result<f64> {
    let k = floor_rho(rho)?;
    if n_terms <= k {
        return Err(invalid("truncation index must exceed floor(rho)"));
    }
    let mut s = 0.0;
    for j in (k + 1..=n_terms).rev() {
        let e: f64 = Exp1.sample(rng);
        s += e / j as f64;
    }
    Ok((-rho * (s - (n_terms as f64).ln())).exp())
}

// --------------------------------------------------------------- truncation

/// Bins kept for distributional experiments at scale `n^{1/(ρ+2)}`.
pub fn distribution_truncation(n: u64, rho: f64, x_max: f64) -> usize {
    let s = 10.0 * x_max * (n as f64).powf(1.0 / (rho + 2.0));
    (s.ceil() as usize).max(64)
}

/// Bins kept for experiments at scale `n^α`.
pub fn power_scale_truncation(n: u64, alpha: f64, x_max: f64) -> usize {
    ((4.0 * x_max * (n as f64).powf(alpha)).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn occ(counts: Vec<u64>) -> OccupancyCounts {
        let total = counts.iter().sum();
        OccupancyCounts {
            counts,
            tail_count: 0,
            n_balls_requested: total,
            mode: ThrowMode::Exact,
            realized_total: total,
        }
    }

    #[test]
    fn zero_bins_rejected() {
        assert!(sample_splits(0, &mut RngStream::new(1, 0).rng()).is_err());
    }

    #[test]
    fn recurrence_and_martingale() {
        let s = sample_splits(1000, &mut RngStream::new(3, 0).rng()).unwrap();
        for i in 1..=1000 {
            let d = s.time(i) - s.time(i - 1);
            let e = s.increments[i - 1] / i as f64;
            assert!((d - e).abs() <= 1e-12 * s.time(i).max(1.0));
            assert!((s.martingale[i - 1] - (s.time(i) - (i as f64).ln())).abs() < 1e-12);
        }
        assert!(s.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn normalization_and_decomposition() {
        let s = sample_splits(5000, &mut RngStream::new(4, 0).rng()).unwrap();
        for &rho in &[0.5, 1.0, 2.0, 3.7] {
            let pv = bin_probabilities(&s, rho).unwrap();
            assert!((pv.total_mass() - 1.0).abs() <= 1e-12);
            assert_eq!(pv.w_values[0], 1.0);
            for i in 1..=pv.n_bins() {
                let p = pv.probs[i - 1];
                assert!(((pv.decomposed(i) - p) / p).abs() <= 1e-12, "i={i} rho={rho}");
            }
        }
        assert!(bin_probabilities(&s, 0.0).is_err());
    }

    #[test]
    fn power_law_small_case() {
        let pv = deterministic_power_law(1.0, 2.0, 2).unwrap();
        let z = std::f64::consts::PI.powi(2) / 6.0;
        assert!((pv.probs[0] - 1.0 / z).abs() < 1e-15);
        assert!((pv.probs[1] - 0.25 / z).abs() < 1e-15);
        assert!((pv.tail_mass - (z - 1.25) / z).abs() < 1e-14);
        assert!((pv.total_mass() - 1.0).abs() < 1e-15);
        assert_eq!(pv.source_tag(), SourceTag::DeterministicPowerLaw);
        assert!(deterministic_power_law(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn power_law_tail_against_direct_summation() {
        let n = 1_000_000usize;
        let pv = deterministic_power_law(1.0, 2.0, n).unwrap();
        let z = std::f64::consts::PI.powi(2) / 6.0;
        let head = compensated_sum((1..=n).rev().map(|i| 1.0 / (i as f64 * i as f64)));
        let oracle = (z - head) / z;
        assert!(((pv.tail_mass - oracle) / oracle).abs() < 1e-9);
        // leading order 6/(π² n), off by the 1/(2n) correction
        let leading = 6.0 / (std::f64::consts::PI.powi(2) * n as f64);
        assert!(((pv.tail_mass - leading) / leading).abs() < 1e-6);
        assert!(pv.probs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn no_balls_means_empty_counts() {
        let s = sample_splits(50, &mut RngStream::new(5, 0).rng()).unwrap();
        let pv = bin_probabilities(&s, 1.0).unwrap();
        for mode in [ThrowMode::Exact, ThrowMode::Poissonized] {
            let o = throw_balls(&pv, 0, mode, &mut RngStream::new(5, 1).rng());
            assert!(o.counts.iter().all(|&c| c == 0));
            assert_eq!(o.tail_count, 0);
        }
    }

    #[test]
    fn empty_process_examples() {
        let o = occ(vec![0; 5]);
        let p = empty_bin_process(&o, 0, ScaleDescriptor::power(5, 1.0)).unwrap();
        match p {
            ScaledPointProcess::Line { points, .. } => {
                let expect: Vec<f64> = (1..=5).map(|i| i as f64 / 5.0).collect();
                assert_eq!(points, expect);
            }
            _ => panic!(),
        }
        let o = occ(vec![0, 2, 1, 4]);
        let p = empty_bin_process(&o, 0, ScaleDescriptor::power(100, 0.5)).unwrap();
        assert_eq!(p, ScaledPointProcess::Line { points: vec![0.1], scale: ScaleDescriptor::power(100, 0.5) });
        assert!(empty_bin_process(&o, 0, ScaleDescriptor::power(100, 0.0)).is_err());
    }

    #[test]
    fn first_empty_examples() {
        assert_eq!(first_empty_index(&occ(vec![0, 3, 1])).unwrap(), 1);
        assert_eq!(first_empty_index(&occ(vec![2, 1, 0])).unwrap(), 3);
        assert_eq!(first_empty_index(&occ(vec![2, 1, 5])), Err(Error::NoEmptyBin { n_bins: 3 }));
    }

    #[test]
    fn two_dim_at_unit_n() {
        let s = sample_splits(20, &mut RngStream::new(6, 0).rng()).unwrap();
        let pv = bin_probabilities(&s, 1.5).unwrap();
        match two_dim_process(&pv, 1).unwrap() {
            ScaledPointProcess::Plane { points, .. } => {
                for (i, (x, y)) in points.iter().enumerate() {
                    assert_eq!(*x, (i + 1) as f64);
                    assert_eq!(*y, pv.probs[i]);
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn conditional_window_respected() {
        let mut rng = RngStream::new(7, 0).rng();
        let w = Interval::new(5.0, 6.0).unwrap();
        for _ in 0..1000 {
            let x = sample_t_k_conditional(3, w, &mut rng).unwrap();
            assert!((5.0..=6.0).contains(&x));
        }
        let far = Interval::new(30.0, 31.0).unwrap();
        let x = sample_t_k_conditional(2, far, &mut rng).unwrap();
        assert!((30.0..=31.0).contains(&x));
        assert!(sample_t_k_conditional(2, Interval { lo: 900.0, hi: 901.0 }, &mut rng).is_err());
    }

    #[test]
    fn conditioned_splits_hit_t_k() {
        let mut rng = RngStream::new(8, 0).rng();
        let s = sample_splits_given_t_k(40, 3, 4.5, &mut rng).unwrap();
        assert!((s.time(3) - 4.5).abs() < 1e-12);
        assert!(s.times.windows(2).all(|w| w[1] > w[0]));
        assert!(s.increments.iter().all(|&e| e > 0.0));
    }

    #[test]
    fn d_rho_positive_and_guarded() {
        let mut rng = RngStream::new(9, 0).rng();
        for _ in 0..100 {
            assert!(sample_d_rho(2.0, &mut rng).unwrap() > 0.0);
        }
        assert!(sample_d_rho(0.5, &mut rng).is_err());
        assert!(sample_d_rho_truncated(2.0, 2, &mut rng).is_err());
    }

    #[test]
    fn truncation_defaults() {
        assert_eq!(distribution_truncation(10, 1.0, 1.0), 64);
        assert_eq!(distribution_truncation(1_000_000, 1.0, 2.0), 2000);
        assert_eq!(power_scale_truncation(1_000_000, 0.5, 1.0), 4000);
    }

    #[test]
    fn csv_headers() {
        let s = sample_splits(3, &mut RngStream::new(1, 0).rng()).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,increment,time,martingale\n1,"));
        assert_eq!(text.lines().count(), 4);
        let mut buf = Vec::new();
        occ(vec![1, 0]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,count\n1,1\n2,0\n");
    }
}
