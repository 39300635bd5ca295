//! The experiment catalog: theorem anchors, default parameters and range checks.

use crate::config::{ExperimentId, Params};

pub struct CatalogEntry {
    pub id: ExperimentId,
    pub anchor: &'static str,
    pub summary: &'static str,
}

const ENTRIES: [CatalogEntry; 10] = [
    CatalogEntry {
        id: ExperimentId::ModelChecks,
        anchor: "Section 2: law of t_n, Gumbel limit of M_n, P_i decomposition; Condition C",
        summary: "normalization, decomposition, marginal laws, inequality for (1-e^{-yE})/y, Condition C",
    },
    CatalogEntry {
        id: ExperimentId::LimitLaw,
        anchor: "Section 5: the variable D_rho and E(1/D_rho); Theorem 5 count law",
        summary: "Gamma^rho law of D_rho against the truncated split sum, E(1/D_rho), pmf normalization",
    },
    CatalogEntry {
        id: ExperimentId::TwoDimPp,
        anchor: "Theorem 3: mixed Poisson limit of (i/n^{1/(rho+2)}, nP_i)",
        summary: "rectangle Laplace functional and rectangle mean of the two-dimensional process",
    },
    CatalogEntry {
        id: ExperimentId::FirstEmpty,
        anchor: "Theorem 5 and its corollary: first empty bin",
        summary: "survival of nu_n/n^{1/(rho+2)}, rate of the mixed Poisson empty-bin process",
    },
    CatalogEntry {
        id: ExperimentId::MixedPoisson,
        anchor: "Section 5 opening display and the poissonization lemma",
        summary: "mean and overdispersion of empty counts for rho < 1, poissonization gap",
    },
    CatalogEntry {
        id: ExperimentId::Lln,
        anchor: "Proposition 2: law of large numbers",
        summary: "scaled rectangle count at kappa > 1/(rho+2) against its deterministic limit",
    },
    CatalogEntry {
        id: ExperimentId::DeterministicCompare,
        anchor: "Section 4: comparison with a deterministic power law",
        summary: "expected empty counts of the shifted process against the e^x intensity",
    },
    CatalogEntry {
        id: ExperimentId::RareRegimes,
        anchor: "Proposition kr and the proposition on the average number of empty bins",
        summary: "growth exponents of expected empty counts in the three conditioning regimes",
    },
    CatalogEntry {
        id: ExperimentId::DoubleThreshold,
        anchor: "Corollary corolkr (psi ratio) and the double threshold discussion",
        summary: "psi ratio of conditioned expected counts, rare-event signature in simulation",
    },
    CatalogEntry {
        id: ExperimentId::Rho1Critical,
        anchor: "Proposition for the critical case rho = 1",
        summary: "linear growth and saturation at a = 1/3 of conditioned expected counts",
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn entry(id: ExperimentId) -> &'static CatalogEntry {
    ENTRIES.iter().find(|e| e.id == id).expect("every id has an entry")
}

fn half_decades(lo: i32, hi: i32) -> Vec<f64> {
    (2 * lo..=2 * hi).map(|k| 10f64.powf(k as f64 / 2.0).round()).collect()
}

impl CatalogEntry {
    /// Default parameters as `key=value` pairs, unset fields omitted.
    pub fn defaults_text(&self) -> String {
        let v = serde_json::to_value(self.defaults()).expect("params serialize");
        let mut parts = Vec::new();
        for (k, v) in v.as_object().expect("params is a struct") {
            match v {
                serde_json::Value::Null => {}
                serde_json::Value::Array(a) if a.is_empty() => {}
                _ => parts.push(format!("{k}={v}")),
            }
        }
        parts.join(" ")
    }

    pub fn defaults(&self) -> Params {
        let base = Params {
            rho: vec![1.0],
            n_grid: vec![1e6],
            alpha: None,
            delta: Vec::new(),
            x_grid: vec![1.0],
            replications: 2000,
            k_level: 0,
            beta: None,
        };
        match self.id {
            ExperimentId::ModelChecks => Params {
                rho: vec![0.5, 1.0, 2.0],
                n_grid: vec![1e5],
                x_grid: vec![0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
                replications: 10_000,
                ..base
            },
            ExperimentId::LimitLaw => Params {
                rho: vec![1.0, 1.5, 2.0],
                x_grid: vec![0.5, 1.0, 2.0],
                replications: 10_000,
                ..base
            },
            ExperimentId::TwoDimPp => Params {
                rho: vec![1.0, 0.5],
                ..base
            },
            ExperimentId::FirstEmpty => Params {
                x_grid: vec![0.5, 1.0, 2.0],
                ..base
            },
            ExperimentId::MixedPoisson => Params {
                rho: vec![0.5],
                n_grid: vec![1e5, 1e6],
                ..base
            },
            ExperimentId::Lln => Params {
                n_grid: vec![1e6, 1e7, 1e8],
                alpha: Some(0.5),
                replications: 20,
                ..base
            },
            ExperimentId::DeterministicCompare => Params {
                rho: Vec::new(),
                n_grid: vec![1e6, 1e7, 1e8],
                delta: vec![2.0],
                x_grid: vec![-2.0, -1.0, 0.0],
                replications: 1,
                ..base
            },
            ExperimentId::RareRegimes => Params {
                rho: vec![2.0],
                n_grid: half_decades(5, 9),
                alpha: Some(0.22),
                delta: vec![0.06, 0.14, 0.25],
                replications: 100_000,
                ..base
            },
            ExperimentId::DoubleThreshold => Params {
                rho: vec![2.0],
                n_grid: vec![1e6, 1e8],
                alpha: Some(0.22),
                ..base
            },
            ExperimentId::Rho1Critical => Params {
                n_grid: vec![1e10],
                alpha: Some(1.0 / 3.0),
                delta: vec![0.05, 0.1, 0.15, 0.2, 0.5, 1.0],
                replications: 1_000_000,
                beta: Some(0.01),
                ..base
            },
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_finite_positive(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite() && *x > 0.0)
}

/// Range checks of the parameter record for one experiment.
pub fn validate(id: ExperimentId, p: &Params) -> Result<(), String> {
    use ExperimentId::*;
    let needs_rho = id != DeterministicCompare;
    if needs_rho {
        check(!p.rho.is_empty() && all_finite_positive(&p.rho), || {
            format!("rho must be a non-empty list of positive reals, got {:?}", p.rho)
        })?;
    }
    check(
        !p.n_grid.is_empty() && p.n_grid.iter().all(|n| n.is_finite() && *n >= 1.0 && n.fract() == 0.0),
        || format!("n_grid must hold positive integers, got {:?}", p.n_grid),
    )?;
    check(p.n_grid.iter().all(|&n| n <= 1e15), || "n_grid entries must not exceed 1e15".into())?;
    check(p.replications >= 1, || "replications must be positive".into())?;
    check(p.x_grid.iter().all(|x| x.is_finite()) && !p.x_grid.is_empty(), || {
        "x_grid must be a non-empty list of reals".into()
    })?;
    match id {
        ModelChecks => {
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 50, || "the KS checks need at least 50 replications".into())?;
        }
        LimitLaw => {
            check(p.rho.iter().all(|&r| r >= 1.0), || "D_rho needs rho >= 1".into())?;
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 50, || "the KS checks need at least 50 replications".into())?;
        }
        TwoDimPp => {
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 100, || "Laplace functionals need at least 100 replications".into())?;
        }
        FirstEmpty => {
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 100, || "decile conditioning needs at least 100 replications".into())?;
        }
        MixedPoisson => {
            check(p.rho.iter().all(|&r| r < 1.0), || "finite mean counts need rho < 1".into())?;
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 200, || "the count GOF test needs at least 200 counts".into())?;
        }
        Lln => {
            let kappa = p.alpha.ok_or("lln needs alpha (the exponent kappa)")?;
            check(p.rho.iter().all(|&r| kappa > 1.0 / (r + 2.0)), || {
                format!("kappa = {kappa} must exceed 1/(rho+2)")
            })?;
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 2, || "need at least two replications".into())?;
        }
        DeterministicCompare => {
            check(!p.delta.is_empty() && p.delta.iter().all(|&d| d > 1.0 && d.is_finite()), || {
                "delta must hold reals > 1".into()
            })?;
            check(p.x_grid.len() >= 2 && p.x_grid.windows(2).all(|w| w[0] < w[1]), || {
                "x_grid must list at least two increasing window endpoints".into()
            })?;
        }
        RareRegimes | DoubleThreshold => {
            let alpha = p.alpha.ok_or("alpha is required")?;
            for &rho in &p.rho {
                check(rho > 1.0, || "rare-event regimes need rho > 1".into())?;
                let (lo, hi) = (1.0 / (2.0 * rho + 1.0), 1.0 / (rho + 2.0));
                check(alpha >= lo && alpha < hi, || format!("alpha must lie in [{lo}, {hi}) for rho = {rho}"))?;
            }
            check(p.delta.iter().all(|&d| d >= 0.0 && d.is_finite()), || "delta must be non-negative".into())?;
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            if id == RareRegimes {
                check(p.n_grid.len() >= 2, || "slope regression needs at least two n values".into())?;
                check(p.replications >= 2, || "need at least two replications".into())?;
            } else {
                check(p.replications >= 100, || "need at least 100 replications".into())?;
            }
        }
        Rho1Critical => {
            check(p.rho == [1.0], || "rho1-critical runs at rho = 1 only".into())?;
            let beta = p.beta.ok_or("rho1-critical needs beta")?;
            check(beta > 0.0 && beta < 1.0 / 3.0, || "beta must lie in (0, 1/3)".into())?;
            check(p.alpha.is_none_or(|a| (a - 1.0 / 3.0).abs() < 1e-12), || "alpha is fixed at 1/3".into())?;
            check(!p.delta.is_empty() && all_finite_positive(&p.delta), || "delta (the a grid) must be positive".into())?;
            check(p.delta.iter().any(|&a| a < 1.0 / 3.0) && p.delta.iter().any(|&a| a >= 1.0 / 3.0), || {
                "the a grid needs points on both sides of 1/3".into()
            })?;
            check(all_finite_positive(&p.x_grid), || "x_grid must be positive".into())?;
            check(p.replications >= 2, || "need at least two replications".into())?;
        }
    }
    Ok(())
}
