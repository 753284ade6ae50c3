//! Sheather–Jones bandwidth selection.
//!
//! Two-stage normal-reference recipe with exact pairwise sums:
//!
//! * `S(a) = [sum_{i≠j} phi4((x_i - x_j)/a) + n phi4(0)] / (n (n-1) a^5)`
//! * `T(b) = [sum_{i≠j} phi6((x_i - x_j)/b) + n phi6(0)] / (n (n-1) b^7)`
//! * pilot bandwidths `a = 1.24 scale n^-1/7`, `b = 1.23 scale n^-1/9` with
//!   `scale = min(sd, IQR/1.349)`
//! * plug-in: `h = (R(K) / (n S(alpha)))^(1/5)`, `alpha = (2.394 / (n (-T(b))))^(1/7)`
//! * solve-the-equation: root of `h = (R(K) / (n S(1.357 (S(a)/(-T(b)))^(1/7) h^(5/7))))^(1/5)`
//!
//! with `R(K) = 1 / (2 sqrt(pi))` for the normal kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::INV_SQRT_2PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethod {
    /// Mean of the plug-in and solve-the-equation values.
    SjAverage,
    Plugin,
    Ste,
    SilvermanFallback,
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub h: f64,
    pub method: BandwidthMethod,
}

impl Bandwidth {
    pub fn manual(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Self { h, method: BandwidthMethod::Manual })
        } else {
            Err(Error::Config(format!("bandwidth must be positive, got {h}")))
        }
    }
}

const STE_REL_TOL: f64 = 1e-6;
const MAX_BRACKET_TRIES: usize = 100;

struct Summary {
    n: f64,
    sd: f64,
    scale: f64,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    // linear interpolation between order statistics (type 7)
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(data: &[f64]) -> Result<Summary> {
    if data.len() < 3 {
        return Err(Error::Data(format!(
            "bandwidth selection needs at least 3 observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("bandwidth selection got non-finite data".into()));
    }
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::Data("bandwidth selection needs positive sample variance".into()));
    }
    let sd = var.sqrt();
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    Ok(Summary { n, sd, scale })
}

/// `0.9 min(sd, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64> {
    let s = summarize(data)?;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { s.sd.min(iqr / 1.34) } else { s.sd };
    Ok(0.9 * spread * s.n.powf(-0.2))
}

/// Density-derivative functional from the pairwise kernel sum.
fn pair_functional(data: &[f64], bw: f64, deriv: fn(f64) -> f64, power: i32) -> f64 {
    let n = data.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += deriv((data[i] - data[j]) / bw);
        }
    }
    let total = 2.0 * sum + n as f64 * deriv(0.0);
    total / ((n * (n - 1)) as f64 * bw.powi(power))
}

fn phi4(x: f64) -> f64 {
    let x2 = x * x;
    (x2 * x2 - 6.0 * x2 + 3.0) * INV_SQRT_2PI * (-0.5 * x2).exp()
}

fn phi6(x: f64) -> f64 {
    let x2 = x * x;
    (x2 * x2 * x2 - 15.0 * x2 * x2 + 45.0 * x2 - 15.0) * INV_SQRT_2PI * (-0.5 * x2).exp()
}

fn sdh(data: &[f64], a: f64) -> f64 {
    pair_functional(data, a, phi4, 5)
}

fn tdh(data: &[f64], b: f64) -> f64 {
    pair_functional(data, b, phi6, 7)
}

struct Pilots {
    c1: f64,
    a: f64,
    td: f64,
    hmax: f64,
}

fn pilots(data: &[f64]) -> Result<Pilots> {
    let s = summarize(data)?;
    let a = 1.24 * s.scale * s.n.powf(-1.0 / 7.0);
    let b = 1.23 * s.scale * s.n.powf(-1.0 / 9.0);
    let td = -tdh(data, b);
    if !(td > 0.0 && td.is_finite()) {
        return Err(Error::Numerical(format!("sixth-derivative functional {td} is not positive")));
    }
    Ok(Pilots {
        c1: 1.0 / (2.0 * PI.sqrt() * s.n),
        a,
        td,
        hmax: 1.144 * s.scale * s.n.powf(-0.2),
    })
}

/// Direct plug-in bandwidth.
pub fn plugin_bandwidth(data: &[f64]) -> Result<f64> {
    let p = pilots(data)?;
    let alpha = (2.394 / (data.len() as f64 * p.td)).powf(1.0 / 7.0);
    let s = sdh(data, alpha);
    if !(s > 0.0) {
        return Err(Error::Numerical(format!("fourth-derivative functional {s} is not positive")));
    }
    Ok((p.c1 / s).powf(0.2))
}

/// Solve-the-equation bandwidth, root found by bisection.
pub fn ste_bandwidth(data: &[f64]) -> Result<f64> {
    let p = pilots(data)?;
    let sa = sdh(data, p.a);
    if !(sa > 0.0) {
        return Err(Error::Numerical(format!("fourth-derivative functional {sa} is not positive")));
    }
    let alph2 = 1.357 * (sa / p.td).powf(1.0 / 7.0);
    let f = |h: f64| (p.c1 / sdh(data, alph2 * h.powf(5.0 / 7.0))).powf(0.2) - h;

    let (mut lo, mut hi) = (0.1 * p.hmax, p.hmax);
    let mut tries = 0;
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    while !(f_lo * f_hi <= 0.0) {
        tries += 1;
        if tries > MAX_BRACKET_TRIES {
            return Err(Error::Numerical("solve-the-equation root could not be bracketed".into()));
        }
        lo *= 0.9;
        hi *= 1.2;
        f_lo = f(lo);
        f_hi = f(hi);
    }
    while (hi - lo) > STE_REL_TOL * 0.5 * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::Numerical("solve-the-equation objective is undefined".into()));
        }
        if (f_mid <= 0.0) == (f_lo <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mean of the plug-in and solve-the-equation bandwidths, or Silverman's
/// rule when either one cannot be computed.
pub fn select_bandwidth(data: &[f64]) -> Result<Bandwidth> {
    summarize(data)?;
    match (plugin_bandwidth(data), ste_bandwidth(data)) {
        (Ok(dpi), Ok(ste)) => Ok(Bandwidth {
            h: 0.5 * (dpi + ste),
            method: BandwidthMethod::SjAverage,
        }),
        _ => Ok(Bandwidth {
            h: silverman_bandwidth(data)?,
            method: BandwidthMethod::SilvermanFallback,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn normal_quantile_sample(n: usize) -> Vec<f64> {
        use statrs::distribution::{ContinuousCDF, Normal};
        let z = Normal::new(0.0, 1.0).unwrap();
        (1..=n).map(|k| z.inverse_cdf((k as f64 - 0.5) / n as f64)).collect()
    }

    #[test]
    fn silverman_formula() {
        // equally spaced data has a closed-form sd and IQR
        let data: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let sd = (100.0 * 101.0 / 12.0f64).sqrt();
        let iqr = 74.25 - 24.75;
        let expect = 0.9 * sd.min(iqr / 1.34) * 100f64.powf(-0.2);
        assert_relative_eq!(silverman_bandwidth(&data).unwrap(), expect, epsilon = 1e-12);
        assert_relative_eq!(0.9 * 100f64.powf(-0.2), 0.358_3, epsilon = 1e-4);
    }

    #[test]
    fn phi_derivatives_at_zero() {
        assert_relative_eq!(phi4(0.0), 3.0 * INV_SQRT_2PI);
        assert_relative_eq!(phi6(0.0), -15.0 * INV_SQRT_2PI);
    }

    #[test]
    fn normal_sample_bandwidths_near_reference() {
        // for N(0,1) the AMISE-optimal h is (4/3)^(1/5) n^(-1/5) ≈ 1.06 n^(-1/5)
        let data = normal_quantile_sample(200);
        let h_ref = 1.06 * 200f64.powf(-0.2);
        let dpi = plugin_bandwidth(&data).unwrap();
        let ste = ste_bandwidth(&data).unwrap();
        assert!((dpi / h_ref - 1.0).abs() < 0.25, "dpi {dpi} vs {h_ref}");
        assert!((ste / h_ref - 1.0).abs() < 0.25, "ste {ste} vs {h_ref}");
        let bw = select_bandwidth(&data).unwrap();
        assert_eq!(bw.method, BandwidthMethod::SjAverage);
        assert_relative_eq!(bw.h, 0.5 * (dpi + ste));
    }

    #[test]
    fn ste_is_a_fixed_point() {
        let data = normal_quantile_sample(60);
        let h = ste_bandwidth(&data).unwrap();
        let p = pilots(&data).unwrap();
        let alph2 = 1.357 * (sdh(&data, p.a) / p.td).powf(1.0 / 7.0);
        let rhs = (p.c1 / sdh(&data, alph2 * h.powf(5.0 / 7.0))).powf(0.2);
        assert!((rhs - h).abs() < 1e-5 * h);
    }

    #[test]
    fn scale_equivariance() {
        let data = normal_quantile_sample(80);
        let scaled: Vec<f64> = data.iter().map(|x| 3.0 * x + 10.0).collect();
        let a = select_bandwidth(&data).unwrap().h;
        let b = select_bandwidth(&scaled).unwrap().h;
        assert_relative_eq!(b, 3.0 * a, max_relative = 1e-5);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(select_bandwidth(&[1.0, 2.0]), Err(Error::Data(_))));
        assert!(matches!(select_bandwidth(&[2.0; 10]), Err(Error::Data(_))));
        assert!(Bandwidth::manual(0.0).is_err());
    }
}
