//! Frequentist baselines: the classical kernel estimate of `g` and Jones'
//! estimate of `f` from length-biased data, both with normal kernels
//! truncated to the positive half-line and renormalized on the grid.

mod bandwidth;

pub use bandwidth::{
    plugin_bandwidth, select_bandwidth, silverman_bandwidth, ste_bandwidth, Bandwidth,
    BandwidthMethod,
};

use crate::density::{validate_grid, DensityEstimate};
use crate::error::{Error, Result};
use crate::stats::std_normal_pdf;

/// `n / sum_i 1/y_i`.
pub fn harmonic_mean(data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("harmonic mean of an empty sample".into()));
    }
    check_positive(data)?;
    let inv: f64 = data.iter().map(|y| 1.0 / y).sum();
    Ok(data.len() as f64 / inv)
}

fn check_positive(data: &[f64]) -> Result<()> {
    match data.iter().position(|y| !(*y > 0.0 && y.is_finite())) {
        Some(i) => Err(Error::Data(format!(
            "observation {} is {}; kernel estimates need positive data",
            i + 1,
            data[i]
        ))),
        None => Ok(()),
    }
}

fn weighted_kernel_sum(data: &[f64], weights: &[f64], h: f64, grid: &[f64]) -> Result<DensityEstimate> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
    }
    validate_grid(grid)?;
    if data.is_empty() {
        return Err(Error::Data("kernel estimate of an empty sample".into()));
    }
    let n = data.len() as f64;
    let values = grid
        .iter()
        .map(|&x| {
            // the indicator 1(y > 0); y = 0 itself keeps its limit value
            if x < 0.0 {
                return 0.0;
            }
            data.iter()
                .zip(weights)
                .map(|(&yj, &wj)| wj * std_normal_pdf((x - yj) / h))
                .sum::<f64>()
                / (n * h)
        })
        .collect();
    DensityEstimate::new(grid.to_vec(), values)?.normalize()
}

/// `g~_h(y) ∝ n^-1 sum_j N(y | y_j, h^2) 1(y > 0)`.
pub fn classical_kde(data: &[f64], h: &Bandwidth, grid: &[f64]) -> Result<DensityEstimate> {
    weighted_kernel_sum(data, &vec![1.0; data.len()], h.h, grid)
}

/// `f^_{J,h}(y) ∝ n^-1 mu^ sum_j y_j^-1 N(y | y_j, h^2) 1(y > 0)`, with `mu^`
/// the harmonic mean.
pub fn jones_kde(data: &[f64], h: &Bandwidth, grid: &[f64]) -> Result<DensityEstimate> {
    let mu_hat = harmonic_mean(data)?;
    let weights = kernel_weights_jones(data, mu_hat);
    weighted_kernel_sum(data, &weights, h.h, grid)
}

fn kernel_weights_jones(data: &[f64], mu_hat: f64) -> Vec<f64> {
    data.iter().map(|y| mu_hat / y).collect()
}
