use serde::Serialize;

/// Monte Carlo or quadrature estimate with its uncertainty and provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub stderr: f64,
    pub n_replications: usize,
    pub seed: u64,
    pub method: String,
}

impl EstimateWithCI {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(values: &[f64], seed: u64, method: &str) -> Self {
        let (mean, var) = mean_var(values);
        let n = values.len();
        Self {
            value: mean,
            stderr: if n > 0 { (var / n as f64).sqrt() } else { f64::NAN },
            n_replications: n,
            seed,
            method: method.to_string(),
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.stderr *= factor.abs();
        self
    }

    /// Distance to `reference` in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference) / self.stderr
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.stderr
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.stderr
    }
}

/// Mean and unbiased variance (Welford).
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &v) in values.iter().enumerate() {
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    let n = values.len();
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    (mean, var)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
