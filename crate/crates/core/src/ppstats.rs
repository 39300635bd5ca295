//! Goodness of fit, Laplace functionals, dispersion, and the law-of-large-numbers statistic.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimate::{mean_var, EstimateWithCI};
use crate::geometry::Rect;
use crate::special::{chi_square_sf, kolmogorov_sf};
use crate::yule::{BinProbabilityVector, ScaledPointProcess, SourceTag};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicatedSamples {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl ReplicatedSamples {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("samples must be non-empty and finite"));
        }
        Ok(Self { values, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub law_id: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub seed: u64,
}

/// Two-sided one-sample Kolmogorov–Smirnov distance.
pub fn ks_statistic<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

pub fn ks_test<F: Fn(f64) -> f64>(samples: &ReplicatedSamples, cdf: F, law_id: &str) -> Result<GofReport> {
    let n = samples.values.len();
    if n < 50 {
        return Err(Error::TooFewSamples { got: n, needed: 50 });
    }
    let d = ks_statistic(&samples.values, cdf);
    Ok(GofReport {
        law_id: law_id.to_string(),
        statistic: d,
        p_value: kolmogorov_sf((n as f64).sqrt() * d),
        n,
        seed: samples.seed,
    })
}

/// Mean of `exp(-θ N(rect))` over replications.
pub fn empirical_laplace_functional(
    processes: &[ScaledPointProcess],
    rect: &Rect,
    theta: f64,
    seed: u64,
) -> Result<EstimateWithCI> {
    if processes.len() < 100 {
        return Err(Error::TooFewSamples {
            got: processes.len(),
            needed: 100,
        });
    }
    let values: Vec<f64> = processes
        .iter()
        .map(|p| (-theta * p.count_in_rect(rect) as f64).exp())
        .collect();
    Ok(EstimateWithCI::from_samples(&values, seed, "mc"))
}

/// A chi-square cell `[lo, hi]`; `hi = None` is the open upper tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub lo: u64,
    pub hi: Option<u64>,
    pub observed: u64,
    pub expected: f64,
}

/// Cells merged left to right so that each, including the open tail, expects at least 5.
pub fn chi_square_cells<F: Fn(u64) -> f64>(counts: &[u64], pmf: F) -> Result<Vec<Cell>> {
    let total = counts.len() as f64;
    let mut cells = Vec::new();
    let (mut lo, mut cur, mut cum) = (0u64, 0.0, 0.0);
    let mut j = 0u64;
    loop {
        let p = pmf(j);
        if !(p >= 0.0) {
            return Err(invalid(format!("pmf({j}) is not a probability")));
        }
        cur += total * p;
        cum += p;
        let tail = total * (1.0 - cum);
        if tail < 5.0 || j >= 1_000_000 {
            break;
        }
        if cur >= 5.0 {
            cells.push(Cell {
                lo,
                hi: Some(j),
                observed: 0,
                expected: cur,
            });
            lo = j + 1;
            cur = 0.0;
        }
        j += 1;
    }
    let closed: f64 = cells.iter().map(|c| c.expected).sum();
    cells.push(Cell {
        lo,
        hi: None,
        observed: 0,
        expected: total - closed,
    });
    if cells.len() < 2 {
        return Err(Error::DegenerateCells("fewer than two cells after merging".into()));
    }
    for &c in counts {
        let idx = cells.iter().position(|cell| c >= cell.lo && cell.hi.is_none_or(|h| c <= h)).unwrap_or(0);
        cells[idx].observed += 1;
    }
    Ok(cells)
}

/// Chi-square test of integer counts against a pmf.
pub fn count_pmf_test<F: Fn(u64) -> f64>(counts: &[u64], pmf: F, law_id: &str, seed: u64) -> Result<GofReport> {
    if counts.len() < 200 {
        return Err(Error::TooFewSamples {
            got: counts.len(),
            needed: 200,
        });
    }
    let cells = chi_square_cells(counts, pmf)?;
    if let Some(c) = cells.iter().find(|c| c.expected < 5.0) {
        return Err(Error::DegenerateCells(format!("cell starting at {} expects {}", c.lo, c.expected)));
    }
    let stat: f64 = cells
        .iter()
        .map(|c| (c.observed as f64 - c.expected).powi(2) / c.expected)
        .sum();
    Ok(GofReport {
        law_id: law_id.to_string(),
        statistic: stat,
        p_value: chi_square_sf(stat, (cells.len() - 1) as f64),
        n: counts.len(),
        seed,
    })
}

/// Sample variance over sample mean.
pub fn dispersion_index(counts: &[u64]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(Error::TooFewSamples {
            got: counts.len(),
            needed: 2,
        });
    }
    let v: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, var) = mean_var(&v);
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(var / mean)
}

/// `n^{1-(ρ+2)κ} Σ_i θ 1{(i/n^κ, n P_i) ∈ rect}`.
pub fn lln_functional(pv: &BinProbabilityVector, n: u64, kappa: f64, rect: &Rect, theta: f64) -> Result<f64> {
    if pv.source_tag() != SourceTag::Yule {
        return Err(invalid("the law-of-large-numbers statistic needs a Yule vector"));
    }
    let rho = pv.rho;
    if !(kappa > 1.0 / (rho + 2.0)) {
        return Err(invalid(format!("kappa must exceed 1/(rho+2), got {kappa}")));
    }
    let nf = n as f64;
    let scale = nf.powf(kappa);
    let hits = pv
        .probs
        .iter()
        .enumerate()
        .filter(|(i, &p)| rect.contains((i + 1) as f64 / scale, nf * p))
        .count();
    Ok(theta * hits as f64 * nf.powf(1.0 - (rho + 2.0) * kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::special::poisson_pmf;
    use crate::yule::{bin_probabilities, sample_splits, ScaleDescriptor};
    use rand::Rng;
    use rand_distr::{Distribution, Exp1, Poisson};

    fn exp_cdf(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    #[test]
    fn ks_null_and_gross_misfit() {
        let mut rng = RngStream::new(11, 0).rng();
        let v: Vec<f64> = (0..10_000).map(|_| Exp1.sample(&mut rng)).collect();
        let s = ReplicatedSamples::new(v, 11).unwrap();
        assert!(ks_test(&s, exp_cdf, "exp").unwrap().p_value > 0.01);
        let g = ks_test(&s, crate::limits::gumbel_cdf, "gumbel").unwrap();
        assert!(g.p_value < 1e-6);
    }

    #[test]
    fn ks_constant_samples() {
        let s = ReplicatedSamples::new(vec![0.3; 100], 0).unwrap();
        assert!(ks_test(&s, exp_cdf, "exp").unwrap().statistic >= 0.5);
        let few = ReplicatedSamples::new(vec![0.3; 49], 0).unwrap();
        assert_eq!(
            ks_test(&few, exp_cdf, "exp"),
            Err(Error::TooFewSamples { got: 49, needed: 50 })
        );
    }

    #[test]
    fn ks_null_rejection_rate() {
        let mut rejections = 0;
        for r in 0..200u64 {
            let mut rng = RngStream::new(12, r).rng();
            let v: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            let s = ReplicatedSamples::new(v, 12).unwrap();
            if ks_test(&s, |x| x.clamp(0.0, 1.0), "uniform").unwrap().p_value < 0.05 {
                rejections += 1;
            }
        }
        let frac = rejections as f64 / 200.0;
        assert!((0.01..=0.12).contains(&frac), "{frac}");
    }

    #[test]
    fn laplace_functional_trivial_cases() {
        let empty: Vec<ScaledPointProcess> = (0..100)
            .map(|_| ScaledPointProcess::Plane {
                points: vec![],
                scale: ScaleDescriptor::power(1, 1.0),
            })
            .collect();
        let r = Rect::origin(1.0, 1.0);
        let e = empirical_laplace_functional(&empty, &r, 2.0, 0).unwrap();
        assert_eq!((e.value, e.stderr), (1.0, 0.0));
        let full: Vec<ScaledPointProcess> = (0..100)
            .map(|i| ScaledPointProcess::Plane {
                points: vec![(0.5, 0.5); i % 3],
                scale: ScaleDescriptor::power(1, 1.0),
            })
            .collect();
        let z = empirical_laplace_functional(&full, &r, 0.0, 0).unwrap();
        assert_eq!((z.value, z.stderr), (1.0, 0.0));
        let a = empirical_laplace_functional(&full, &r, 0.5, 0).unwrap().value;
        let b = empirical_laplace_functional(&full, &r, 1.0, 0).unwrap().value;
        let c = empirical_laplace_functional(&full, &Rect::origin(0.4, 0.4), 1.0, 0).unwrap().value;
        assert!(b < a && c > b);
        assert!(empirical_laplace_functional(&full[..99], &r, 1.0, 0).is_err());
    }

    #[test]
    fn pmf_test_null_and_misfit() {
        let mut rng = RngStream::new(13, 0).rng();
        let d = Poisson::new(3.0).unwrap();
        let counts: Vec<u64> = (0..5000).map(|_| d.sample(&mut rng) as u64).collect();
        let r = count_pmf_test(&counts, |j| poisson_pmf(j, 3.0), "poisson", 13).unwrap();
        assert!(r.p_value > 0.01, "{r:?}");
        let zeros = vec![0u64; 5000];
        let half = |j: u64| 0.5f64.powi(j as i32 + 1);
        assert!(count_pmf_test(&zeros, half, "geometric", 0).unwrap().p_value < 1e-12);
    }

    #[test]
    fn cells_expect_at_least_five() {
        for &(n, lam) in &[(200usize, 0.3), (1000, 7.0), (400, 40.0)] {
            let counts = vec![1u64; n];
            let cells = chi_square_cells(&counts, |j| poisson_pmf(j, lam)).unwrap();
            assert!(cells.iter().all(|c| c.expected >= 5.0), "{cells:?}");
            assert_eq!(cells.iter().map(|c| c.observed).sum::<u64>(), n as u64);
        }
        assert!(matches!(
            chi_square_cells(&vec![0u64; 200], |j| if j == 0 { 0.99 } else { 0.01 * 0.5f64.powi(j as i32) }),
            Err(Error::DegenerateCells(_))
        ));
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion_index(&[4, 4, 4, 4]).unwrap(), 0.0);
        assert_eq!(dispersion_index(&[0, 0, 0]), Err(Error::ZeroMean));
        let mut rng = RngStream::new(14, 0).rng();
        let d = Poisson::new(5.0).unwrap();
        let counts: Vec<u64> = (0..100_000).map(|_| d.sample(&mut rng) as u64).collect();
        let di = dispersion_index(&counts).unwrap();
        // sd of the sample dispersion index is about sqrt(2/n)
        assert!((di - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt(), "{di}");
    }

    #[test]
    fn lln_trivial_cases() {
        let s = sample_splits(2000, &mut RngStream::new(15, 0).rng()).unwrap();
        let pv = bin_probabilities(&s, 1.0).unwrap();
        assert_eq!(lln_functional(&pv, 1_000_000, 0.5, &Rect::origin(1.0, 1.0), 0.0).unwrap(), 0.0);
        let flat = Rect {
            x0: 0.0,
            x1: 1.0,
            y0: 0.5,
            y1: 0.5,
        };
        assert_eq!(lln_functional(&pv, 1_000_000, 0.5, &flat, 1.0).unwrap(), 0.0);
        assert!(lln_functional(&pv, 1_000_000, 0.3, &flat, 1.0).is_err());
    }
}
