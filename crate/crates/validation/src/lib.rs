//! Acceptance criteria A1-A12 evaluated on the catalog defaults.
//!
//! Each criterion is the conjunction of the experiment criteria whose ids carry its
//! prefix, plus a wall-clock budget where one is set.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use yule_bins::output::Criterion;
use yule_bins::{run_in_memory, ExperimentConfig, ExperimentId, Report, RunError};

pub struct Spec {
    pub id: &'static str,
    pub experiment: ExperimentId,
    /// Section timings to sum; empty means the whole experiment.
    pub sections: &'static [&'static str],
    pub budget: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub const CRITERIA: [Spec; 12] = [
    Spec { id: "A1", experiment: ExperimentId::ModelChecks, sections: &["A1"], budget: secs(10) },
    Spec { id: "A2", experiment: ExperimentId::ModelChecks, sections: &["A2"], budget: secs(120) },
    Spec { id: "A3", experiment: ExperimentId::FirstEmpty, sections: &[], budget: secs(300) },
    Spec { id: "A4", experiment: ExperimentId::FirstEmpty, sections: &[], budget: None },
    Spec { id: "A5", experiment: ExperimentId::MixedPoisson, sections: &["A5"], budget: secs(300) },
    Spec { id: "A6", experiment: ExperimentId::RareRegimes, sections: &["A6"], budget: secs(60) },
    Spec { id: "A7", experiment: ExperimentId::RareRegimes, sections: &["A7"], budget: None },
    Spec { id: "A8", experiment: ExperimentId::DoubleThreshold, sections: &["A8"], budget: None },
    Spec { id: "A9", experiment: ExperimentId::Rho1Critical, sections: &[], budget: None },
    Spec { id: "A10", experiment: ExperimentId::LimitLaw, sections: &["A10"], budget: None },
    Spec { id: "A11", experiment: ExperimentId::MixedPoisson, sections: &["A11"], budget: None },
    Spec { id: "A12", experiment: ExperimentId::DeterministicCompare, sections: &[], budget: None },
];

pub struct Verdict {
    pub id: &'static str,
    pub experiment: ExperimentId,
    pub pass: bool,
    pub time: Duration,
    pub budget: Option<Duration>,
    pub parts: Vec<Criterion>,
}

fn elapsed(report: &Report, total: Duration, sections: &[&str]) -> Duration {
    if sections.is_empty() {
        return total;
    }
    report
        .timings
        .iter()
        .filter(|(name, _)| sections.contains(&name.as_str()))
        .map(|(_, d)| *d)
        .sum()
}

/// Runs every experiment the criteria need, once each.
pub fn evaluate() -> Result<Vec<Verdict>, RunError> {
    let mut reports: BTreeMap<ExperimentId, (Report, Duration)> = BTreeMap::new();
    for spec in &CRITERIA {
        if reports.contains_key(&spec.experiment) {
            continue;
        }
        let cfg = ExperimentConfig::defaults(spec.experiment);
        let start = Instant::now();
        let report = run_in_memory(&cfg, None)?;
        reports.insert(spec.experiment, (report, start.elapsed()));
    }
    Ok(CRITERIA
        .iter()
        .map(|spec| {
            let (report, total) = &reports[&spec.experiment];
            let prefix = format!("{}-", spec.id);
            let parts: Vec<Criterion> = report.criteria.iter().filter(|c| c.id.starts_with(&prefix)).cloned().collect();
            let time = elapsed(report, *total, spec.sections);
            let in_budget = spec.budget.is_none_or(|b| time <= b);
            Verdict {
                id: spec.id,
                experiment: spec.experiment,
                pass: !parts.is_empty() && parts.iter().all(|c| c.pass) && in_budget && !report.truncated,
                time,
                budget: spec.budget,
                parts,
            }
        })
        .collect())
}

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.6}")
    }
}

impl Verdict {
    /// One line: verdict, id, experiment, time, then each part (`!` marks a failed part).
    pub fn line(&self) -> String {
        let detail: Vec<String> = self
            .parts
            .iter()
            .map(|c| {
                format!(
                    "{}{} measured={} ref={} tol={}",
                    if c.pass { "" } else { "!" },
                    c.id,
                    num(c.measured),
                    num(c.reference),
                    num(c.tolerance)
                )
            })
            .collect();
        let budget = self.budget.map_or(String::new(), |b| format!(" budget={}s", b.as_secs()));
        format!(
            "{} {:<4} [{}] time={:.2}s{} | {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.experiment,
            self.time.as_secs_f64(),
            budget,
            detail.join("; ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_criterion_has_a_distinct_prefix() {
        for (i, a) in CRITERIA.iter().enumerate() {
            for b in &CRITERIA[i + 1..] {
                assert!(!format!("{}-", a.id).starts_with(&format!("{}-", b.id)));
            }
        }
    }
}
