//! Density evaluation and sampling for the distributions the pipeline uses.
//!
//! Gammas use the shape/rate parameterization, density proportional to
//! `x^(shape-1) exp(-rate x)`. Log-normals are parameterized by the location
//! `mu` and the precision `lambda` of `log y`.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::{beta::beta_reg, erf::erfc, gamma::gamma_lr, gamma::ln_gamma};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    pub mu: f64,
    pub lambda: f64,
}

impl LogNormalParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Config(format!("log-normal location must be finite, got {mu}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "log-normal precision must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { mu, lambda })
    }

    /// Variance of `log y`.
    pub fn sigma2(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("log-normal density needs y > 0, got {y}")));
        }
        Ok(self.ln_pdf_positive(y).exp())
    }

    /// Log density for `y > 0`; the caller guarantees positivity.
    #[inline]
    pub(crate) fn ln_pdf_positive(&self, y: f64) -> f64 {
        let ly = y.ln();
        self.ln_pdf_from_log(ly)
    }

    /// Log density given `log y`.
    #[inline]
    pub(crate) fn ln_pdf_from_log(&self, log_y: f64) -> f64 {
        let z = log_y - self.mu;
        0.5 * self.lambda.ln() - LN_SQRT_2PI - log_y - 0.5 * self.lambda * z * z
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        std_normal_cdf((y.ln() - self.mu) * self.lambda.sqrt())
    }

    /// `E[1/Y] = exp(-mu + sigma^2 / 2)`.
    pub fn inverse_moment(&self) -> f64 {
        (-self.mu + 0.5 * self.sigma2()).exp()
    }

    /// `E[Y^-p] = exp(-p mu + p^2 sigma^2 / 2)`.
    pub fn negative_power_moment(&self, p: f64) -> f64 {
        (-p * self.mu + 0.5 * p * p * self.sigma2()).exp()
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma2()).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        (self.mu + z / self.lambda.sqrt()).exp()
    }
}

/// `(lambda / 2 pi)^(1/2) y^-1 exp(-(lambda/2)(log y - mu)^2)`.
pub fn lognormal_pdf(y: f64, p: &LogNormalParams) -> Result<f64> {
    p.pdf(y)
}

/// `integral of y^-1 LN(y | mu, 1/lambda) dy = exp(-mu + 1/(2 lambda))`.
pub fn lognormal_inverse_moment(p: &LogNormalParams) -> f64 {
    p.inverse_moment()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!(
                "gamma needs positive finite shape and rate, got shape={shape}, rate={rate}"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        if y == 0.0 {
            return match self.shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.rate,
                _ => 0.0,
            };
        }
        ((self.shape - 1.0) * y.ln() - self.rate * y + self.shape * self.rate.ln()
            - ln_gamma(self.shape))
        .exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            gamma_lr(self.shape, self.rate * y)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated gamma parameters")
            .sample(rng)
    }
}

/// A finite mixture of log-normals with nonnegative weights summing to one.
///
/// The posterior predictive of the mixture model and its debiased version
/// both have this form.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNormalMixture {
    pub components: Vec<(f64, LogNormalParams)>,
}

impl LogNormalMixture {
    pub fn pdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("mixture density needs y > 0, got {y}")));
        }
        let ly = y.ln();
        Ok(self
            .components
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, p)| w * p.ln_pdf_from_log(ly).exp())
            .sum())
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.components.iter().map(|(w, p)| w * p.cdf(y)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    /// `integral of y^-p g(y) dy`.
    pub fn negative_power_moment(&self, p: f64) -> f64 {
        self.components
            .iter()
            .map(|(w, c)| w * c.negative_power_moment(p))
            .sum()
    }

    /// The normalized density proportional to `y^-p g(y)`.
    ///
    /// `y^-p LN(y | mu, s2) = E[Y^-p] LN(y | mu - p s2, s2)`, so the result is
    /// again a log-normal mixture with shifted locations and reweighted components.
    pub fn power_tilt(&self, p: f64) -> LogNormalMixture {
        let norm = self.negative_power_moment(p);
        let components = self
            .components
            .iter()
            .map(|(w, c)| {
                let shifted = LogNormalParams {
                    mu: c.mu - p * c.sigma2(),
                    lambda: c.lambda,
                };
                (w * c.negative_power_moment(p) / norm, shifted)
            })
            .collect();
        LogNormalMixture { components }
    }

    /// Mass of the mixture outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(lo) + (self.total_weight() - self.cdf(hi))).max(0.0)
    }
}

/// Mixture entry of a [`Dist`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub dist: Dist,
}

/// Distribution descriptor used for truth curves, synthetic data and tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Dist {
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
    LogNormal { mu: f64, lambda: f64 },
    Beta { alpha: f64, beta: f64 },
    Uniform { low: f64, high: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

impl Dist {
    pub fn gamma(shape: f64, rate: f64) -> Self {
        Dist::Gamma { shape, rate }
    }

    pub fn mixture(parts: impl IntoIterator<Item = (f64, Dist)>) -> Self {
        Dist::Mixture {
            components: parts
                .into_iter()
                .map(|(weight, dist)| MixtureComponent { weight, dist })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Dist::Gamma { shape, rate } => GammaParams::new(*shape, *rate).map(|_| ()),
            Dist::Exponential { rate } => positive("exponential rate", *rate),
            Dist::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::Config(format!("normal mean must be finite, got {mean}")));
                }
                positive("normal sd", *sd)
            }
            Dist::LogNormal { mu, lambda } => LogNormalParams::new(*mu, *lambda).map(|_| ()),
            Dist::Beta { alpha, beta } => {
                positive("beta alpha", *alpha)?;
                positive("beta beta", *beta)
            }
            Dist::Uniform { low, high } => {
                if low.is_finite() && high.is_finite() && low < high {
                    Ok(())
                } else {
                    Err(Error::Config(format!("uniform needs low < high, got [{low}, {high}]")))
                }
            }
            Dist::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::Config("mixture has no components".into()));
                }
                let mut total = 0.0;
                for c in components {
                    if !(c.weight >= 0.0 && c.weight.is_finite()) {
                        return Err(Error::Config(format!("mixture weight {} is invalid", c.weight)));
                    }
                    c.dist.validate()?;
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// Normalized density at `y`; zero outside the support.
    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.pdf_unchecked(y))
    }

    fn pdf_unchecked(&self, y: f64) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => GammaParams { shape, rate }.pdf(y),
            Dist::Exponential { rate } => {
                if y < 0.0 {
                    0.0
                } else {
                    rate * (-rate * y).exp()
                }
            }
            Dist::Normal { mean, sd } => std_normal_pdf((y - mean) / sd) / sd,
            Dist::LogNormal { mu, lambda } => {
                if y <= 0.0 {
                    0.0
                } else {
                    LogNormalParams { mu, lambda }.ln_pdf_positive(y).exp()
                }
            }
            Dist::Beta { alpha, beta } => {
                if !(0.0..=1.0).contains(&y) {
                    return 0.0;
                }
                let ln_b = ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta);
                if (y == 0.0 && alpha < 1.0) || (y == 1.0 && beta < 1.0) {
                    return f64::INFINITY;
                }
                let a = if alpha == 1.0 { 0.0 } else { (alpha - 1.0) * y.ln() };
                let b = if beta == 1.0 { 0.0 } else { (beta - 1.0) * (1.0 - y).ln() };
                (a + b - ln_b).exp()
            }
            Dist::Uniform { low, high } => {
                if (low..=high).contains(&y) {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
            Dist::Mixture { ref components } => components
                .iter()
                .map(|c| c.weight * c.dist.pdf_unchecked(y))
                .sum(),
        }
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.cdf_unchecked(y))
    }

    fn cdf_unchecked(&self, y: f64) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => GammaParams { shape, rate }.cdf(y),
            Dist::Exponential { rate } => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            Dist::Normal { mean, sd } => std_normal_cdf((y - mean) / sd),
            Dist::LogNormal { mu, lambda } => LogNormalParams { mu, lambda }.cdf(y),
            Dist::Beta { alpha, beta } => {
                if y <= 0.0 {
                    0.0
                } else if y >= 1.0 {
                    1.0
                } else {
                    beta_reg(alpha, beta, y)
                }
            }
            Dist::Uniform { low, high } => ((y - low) / (high - low)).clamp(0.0, 1.0),
            Dist::Mixture { ref components } => components
                .iter()
                .map(|c| c.weight * c.dist.cdf_unchecked(y))
                .sum(),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.mean_unchecked())
    }

    fn mean_unchecked(&self) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => shape / rate,
            Dist::Exponential { rate } => 1.0 / rate,
            Dist::Normal { mean, .. } => mean,
            Dist::LogNormal { mu, lambda } => LogNormalParams { mu, lambda }.mean(),
            Dist::Beta { alpha, beta } => alpha / (alpha + beta),
            Dist::Uniform { low, high } => 0.5 * (low + high),
            Dist::Mixture { ref components } => components
                .iter()
                .map(|c| c.weight * c.dist.mean_unchecked())
                .sum(),
        }
    }

    /// One draw. Parameters are validated on every call; use
    /// [`Dist::sample_n`] for bulk generation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        Ok(self.sample_unchecked(rng))
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..n).map(|_| self.sample_unchecked(rng)).collect())
    }

    fn sample_unchecked<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Gamma { shape, rate } => GammaParams { shape, rate }.sample(rng),
            Dist::Exponential { rate } => {
                rand_distr::Exp::new(rate).expect("validated rate").sample(rng)
            }
            Dist::Normal { mean, sd } => {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                mean + sd * z
            }
            Dist::LogNormal { mu, lambda } => LogNormalParams { mu, lambda }.sample(rng),
            Dist::Beta { alpha, beta } => rand_distr::Beta::new(alpha, beta)
                .expect("validated beta")
                .sample(rng),
            Dist::Uniform { low, high } => rng.random_range(low..high),
            Dist::Mixture { ref components } => {
                let r: f64 = rng.random();
                let mut acc = 0.0;
                for c in components {
                    acc += c.weight;
                    if r < acc {
                        return c.dist.sample_unchecked(rng);
                    }
                }
                // r landed in the rounding gap above the last partial sum
                let last = components
                    .iter()
                    .rev()
                    .find(|c| c.weight > 0.0)
                    .expect("validated mixture has positive weight");
                last.dist.sample_unchecked(rng)
            }
        }
    }

    /// Lower end of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Dist::Normal { .. } => f64::NEG_INFINITY,
            Dist::Uniform { low, .. } => *low,
            Dist::Mixture { components } => components
                .iter()
                .map(|c| c.dist.support_min())
                .fold(f64::INFINITY, f64::min),
            _ => 0.0,
        }
    }

    /// The density proportional to `y^-p` times this one, when it has a
    /// closed form (gammas and gamma mixtures with `shape > p`).
    ///
    /// For `p = 1` this turns a length-biased density back into the
    /// underlying one, e.g. `Ga(2, 0.5)` into `Exp(0.5)`.
    pub fn power_debiased(&self, p: f64) -> Option<Dist> {
        match self {
            Dist::Gamma { shape, rate } if *shape > p => Some(Dist::Gamma {
                shape: shape - p,
                rate: *rate,
            }),
            Dist::Mixture { components } => {
                let mut parts = Vec::with_capacity(components.len());
                for c in components {
                    let Dist::Gamma { shape, rate } = c.dist else {
                        return None;
                    };
                    if shape <= p {
                        return None;
                    }
                    // E[Y^-p] under Ga(shape, rate)
                    let moment = (p * rate.ln() + ln_gamma(shape - p) - ln_gamma(shape)).exp();
                    parts.push((
                        c.weight * moment,
                        Dist::Gamma {
                            shape: shape - p,
                            rate,
                        },
                    ));
                }
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                Some(Dist::mixture(parts.into_iter().map(|(w, d)| (w / total, d))))
            }
            _ => None,
        }
    }
}

/// Evaluates a descriptor at `y`.
pub fn pdf_eval(dist: &Dist, y: f64) -> Result<f64> {
    dist.pdf(y)
}

/// Normalizing constant of the normal density `(2 pi)^(-1/2)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
