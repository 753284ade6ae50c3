//! Trace diagnostics and distances between density estimates.

use serde::{Deserialize, Serialize};

use crate::density::{trapezoid, DensityEstimate};
use crate::error::{Error, Result};

/// Default maximum lag for autocorrelation plots.
pub const DEFAULT_MAX_LAG: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    /// Running mean of the debiased (Metropolis) sample.
    pub running_mean: Vec<f64>,
    /// Running mean of the posterior-predictive draws.
    pub predictive_running_mean: Vec<f64>,
    /// Autocorrelation of the posterior-predictive draws; empty when the
    /// trace is too short or constant.
    pub acf: Vec<f64>,
    pub acceptance_running: Vec<f64>,
    pub cluster_counts: Vec<usize>,
}

/// `out[k] = mean(x[0..=k])`.
pub fn running_average(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Data("running average of an empty sequence".into()));
    }
    let mut sum = 0.0;
    Ok(x.iter()
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect())
}

/// Autocorrelation with the biased (`n`) denominator for lags `0..=max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag < 1 || x.len() <= max_lag {
        return Err(Error::Data(format!(
            "acf needs length > max_lag >= 1, got length {} and max_lag {max_lag}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if !(denom > 0.0) {
        return Err(Error::Data("acf of a constant sequence".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let num: f64 = centered.iter().zip(&centered[k..]).map(|(a, b)| a * b).sum();
            if k == 0 {
                1.0
            } else {
                (num / denom).clamp(-1.0, 1.0)
            }
        })
        .collect())
}

/// Mean of the per-iteration cluster counts.
pub fn average_clusters(counts: &[usize]) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Data("no cluster counts recorded".into()));
    }
    Ok(counts.iter().sum::<usize>() as f64 / counts.len() as f64)
}

/// Trapezoid integral of `|p - q|` on a shared grid.
pub fn l1_distance(p: &DensityEstimate, q: &DensityEstimate) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::Config("L1 distance needs estimates on the same grid".into()));
    }
    let diff: Vec<f64> = p.values.iter().zip(&q.values).map(|(a, b)| (a - b).abs()).collect();
    Ok(trapezoid(&p.grid, &diff))
}

/// `sup_y |F_n(y) - F(y)|` for the empirical CDF of `sample`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Data("KS statistic of an empty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Critical value `1.63 / sqrt(n)` of the KS statistic at `alpha ≈ 0.01`.
pub fn ks_critical_001(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
