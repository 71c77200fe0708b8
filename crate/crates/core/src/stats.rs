//! Monte Carlo summaries and the nonparametric tests used by the
//! verification routines.

use serde::{Deserialize, Serialize};

/// Point estimate with its standard error and a 95% normal interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MonteCarloEstimate {
    pub fn new(value: f64, std_error: f64, n: usize) -> Self {
        MonteCarloEstimate {
            value,
            std_error,
            n,
            ci_low: value - 1.96 * std_error,
            ci_high: value + 1.96 * std_error,
        }
    }

    pub fn from_sample(sample: &[f64]) -> Self {
        let n = sample.len();
        let mean = sample.iter().sum::<f64>() / n as f64;
        let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
        MonteCarloEstimate::new(mean, (var / n as f64).sqrt(), n)
    }

    /// Binomial proportion with its exact-variance standard error.
    pub fn from_proportion(successes: usize, n: usize) -> Self {
        let p = successes as f64 / n as f64;
        MonteCarloEstimate::new(p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }
}

/// Sample variance with a moment-based standard error
/// (SE^2 = (m4 - s^4) / n).
pub fn variance_with_se(sample: &[f64]) -> (f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let s2 = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = sample.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (s2, ((m4 - s2 * s2).max(0.0) / n).sqrt())
}

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-10 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..101 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-14 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov statistic against a cdf (sorts in place).
pub fn ks_statistic_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

/// One-sample KS p-value (asymptotic).
pub fn ks_one_sample(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let d = ks_statistic_one_sample(sample, cdf);
    kolmogorov_q(d * (n.sqrt() + 0.12 + 0.11 / n.sqrt()))
}

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic); sorts both samples
/// in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n1, n2) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x1 = a[i];
        let x2 = b[j];
        let x = x1.min(x2);
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 as f64 * n2 as f64) / (n1 as f64 + n2 as f64);
    kolmogorov_q(d * (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()))
}

/// Empirical cdf with a Dvoretzky-Kiefer-Wolfowitz confidence band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    /// Sorted sample.
    pub sorted: Vec<f64>,
    /// Half-width of the DKW band at the stored confidence level.
    pub dkw_epsilon: f64,
    pub confidence: f64,
}

impl EmpiricalCdf {
    pub fn new(mut sample: Vec<f64>, confidence: f64) -> Self {
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sample.len() as f64;
        let alpha = 1.0 - confidence;
        let eps = ((2.0f64 / alpha).ln() / (2.0 * n)).sqrt();
        EmpiricalCdf { sorted: sample, dkw_epsilon: eps, confidence }
    }

    pub fn eval(&self, x: f64) -> f64 {
        // number of sample points <= x
        let count = self.sorted.partition_point(|&v| v <= x);
        count as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Binomial standard error of the cdf estimate at `x`.
    pub fn std_error_at(&self, x: f64) -> f64 {
        let p = self.eval(x);
        (p * (1.0 - p) / self.sorted.len() as f64).sqrt()
    }
}

/// Hill estimator of the tail index from the top `k` order statistics of
/// the positive part of a sample. Returns `None` when fewer than `k`
/// strictly positive distinct values exist or all top values coincide.
pub fn hill_tail_index(sample: &[f64], k: usize) -> Option<f64> {
    let mut pos: Vec<f64> = sample.iter().cloned().filter(|&x| x > 0.0).collect();
    if pos.len() < k + 1 || k < 2 {
        return None;
    }
    pos.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let threshold = pos[k];
    let mut sum = 0.0;
    for &x in pos.iter().take(k) {
        sum += (x / threshold).ln();
    }
    if sum <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some(k as f64 / sum)
}
