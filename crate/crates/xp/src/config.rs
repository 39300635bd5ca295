//! Flat JSON experiment configuration with `key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog;

pub const DEFAULT_SEED: u64 = 2026;
pub const THREADS_ENV: &str = "YULE_BINS_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("bad override `{0}`, expected key=value")]
    Override(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    ModelChecks,
    LimitLaw,
    TwoDimPp,
    FirstEmpty,
    MixedPoisson,
    Lln,
    DeterministicCompare,
    RareRegimes,
    DoubleThreshold,
    Rho1Critical,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::ModelChecks,
        ExperimentId::LimitLaw,
        ExperimentId::TwoDimPp,
        ExperimentId::FirstEmpty,
        ExperimentId::MixedPoisson,
        ExperimentId::Lln,
        ExperimentId::DeterministicCompare,
        ExperimentId::RareRegimes,
        ExperimentId::DoubleThreshold,
        ExperimentId::Rho1Critical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::ModelChecks => "model-checks",
            ExperimentId::LimitLaw => "limit-law",
            ExperimentId::TwoDimPp => "two-dim-pp",
            ExperimentId::FirstEmpty => "first-empty",
            ExperimentId::MixedPoisson => "mixed-poisson",
            ExperimentId::Lln => "lln",
            ExperimentId::DeterministicCompare => "deterministic-compare",
            ExperimentId::RareRegimes => "rare-regimes",
            ExperimentId::DoubleThreshold => "double-threshold",
            ExperimentId::Rho1Critical => "rho1-critical",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown experiment `{s}`")))
    }
}

/// A scalar or a list of reals.
#[derive(Deserialize)]
#[serde(untagged)]
enum Reals {
    One(f64),
    Many(Vec<f64>),
}

impl From<Reals> for Vec<f64> {
    fn from(r: Reals) -> Self {
        match r {
            Reals::One(v) => vec![v],
            Reals::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment_id: ExperimentId,
    master_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    threads: Option<Value>,
    rho: Option<Reals>,
    n_grid: Option<Reals>,
    alpha: Option<f64>,
    delta: Option<Reals>,
    x_grid: Option<Reals>,
    replications: Option<usize>,
    k_level: Option<u64>,
    beta: Option<f64>,
}

/// Parameter record; each experiment reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub rho: Vec<f64>,
    pub n_grid: Vec<f64>,
    pub alpha: Option<f64>,
    pub delta: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub replications: usize,
    pub k_level: u64,
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Fixed(usize),
}

impl Threads {
    fn from_value(v: &Value) -> Result<Self, ConfigError> {
        match v {
            Value::String(s) => Self::parse(s),
            Value::Number(n) => match n.as_u64() {
                Some(t) if t >= 1 => Ok(Threads::Fixed(t as usize)),
                _ => Err(ConfigError::Invalid(format!("threads must be a positive integer, got {n}"))),
            },
            other => Err(ConfigError::Invalid(format!("threads must be a positive integer or \"auto\", got {other}"))),
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Threads::Fixed(t)),
            _ => Err(ConfigError::Invalid(format!("threads must be a positive integer or \"auto\", got `{s}`"))),
        }
    }

    pub fn count(self) -> Option<usize> {
        match self {
            Threads::Auto => None,
            Threads::Fixed(t) => Some(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment_id: ExperimentId,
    pub params: Params,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub threads: Threads,
}

impl ExperimentConfig {
    pub fn defaults(id: ExperimentId) -> Self {
        Self {
            experiment_id: id,
            params: catalog::entry(id).defaults(),
            master_seed: DEFAULT_SEED,
            output_dir: PathBuf::from("yule-bins-out").join(id.as_str()),
            threads: Threads::Auto,
        }
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_value(value, overrides)
    }

    pub fn from_value(value: Value, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut obj = match value {
            Value::Object(m) => m,
            _ => return Err(ConfigError::Parse("top level must be a JSON object".into())),
        };
        apply_overrides(&mut obj, overrides)?;
        let raw: RawConfig =
            serde_json::from_value(Value::Object(obj)).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let id = raw.experiment_id;
        let mut cfg = Self::defaults(id);
        let p = &mut cfg.params;
        if let Some(v) = raw.rho {
            p.rho = v.into();
        }
        if let Some(v) = raw.n_grid {
            p.n_grid = v.into();
        }
        if raw.alpha.is_some() {
            p.alpha = raw.alpha;
        }
        if let Some(v) = raw.delta {
            p.delta = v.into();
        }
        if let Some(v) = raw.x_grid {
            p.x_grid = v.into();
        }
        if let Some(v) = raw.replications {
            p.replications = v;
        }
        if let Some(v) = raw.k_level {
            p.k_level = v;
        }
        if raw.beta.is_some() {
            p.beta = raw.beta;
        }
        if let Some(s) = raw.master_seed {
            cfg.master_seed = s;
        }
        if let Some(d) = raw.output_dir {
            cfg.output_dir = d;
        }
        if let Some(t) = raw.threads {
            cfg.threads = Threads::from_value(&t)?;
        }
        catalog::validate(id, &cfg.params).map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    /// Thread count after the environment override.
    pub fn resolved_threads(&self, env: Option<&str>) -> Result<Option<usize>, ConfigError> {
        match env {
            Some(s) => Ok(Threads::parse(s)?.count()),
            None => Ok(self.threads.count()),
        }
    }
}

fn apply_overrides(obj: &mut Map<String, Value>, overrides: &[String]) -> Result<(), ConfigError> {
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::Override(o.clone()))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Override(o.clone()));
        }
        let v = serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string()));
        obj.insert(k.to_string(), v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
            let v = serde_json::to_value(id).unwrap();
            assert_eq!(v, Value::String(id.as_str().into()));
        }
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg = ExperimentConfig::from_value(
            json!({"experiment_id": "first-empty", "replications": 300}),
            &["replications=400".into(), "x_grid=[0.5, 1]".into(), "threads=auto".into()],
        )
        .unwrap();
        assert_eq!(cfg.params.replications, 400);
        assert_eq!(cfg.params.x_grid, vec![0.5, 1.0]);
        assert_eq!(cfg.threads, Threads::Auto);
        assert_eq!(cfg.master_seed, DEFAULT_SEED);
    }

    #[test]
    fn scalars_become_lists() {
        let cfg = ExperimentConfig::from_value(json!({"experiment_id": "two-dim-pp", "rho": 0.5}), &[]).unwrap();
        assert_eq!(cfg.params.rho, vec![0.5]);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            json!({"experiment_id": "nope"}),
            json!({"experiment_id": "first-empty", "colour": 1}),
            json!({"experiment_id": "first-empty", "threads": 0}),
            json!({"experiment_id": "first-empty", "rho": -1.0}),
            json!({"experiment_id": "rare-regimes", "alpha": 0.4}),
            json!([1, 2]),
        ];
        for b in bad {
            assert!(ExperimentConfig::from_value(b.clone(), &[]).is_err(), "{b}");
        }
        let base = json!({"experiment_id": "first-empty"});
        assert!(ExperimentConfig::from_value(base, &["novalue".into()]).is_err());
    }

    #[test]
    fn env_overrides_threads() {
        let cfg = ExperimentConfig::from_value(json!({"experiment_id": "lln", "threads": 3}), &[]).unwrap();
        assert_eq!(cfg.resolved_threads(None).unwrap(), Some(3));
        assert_eq!(cfg.resolved_threads(Some("2")).unwrap(), Some(2));
        assert_eq!(cfg.resolved_threads(Some("auto")).unwrap(), None);
        assert!(cfg.resolved_threads(Some("zero")).is_err());
    }
}
