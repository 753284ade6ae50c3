//! Metropolis conversion of draws from a biased density `g` into draws from
//! `f(y) ∝ g(y) / w(y)`.
//!
//! With proposals drawn independently from `g`, the kernel that moves from
//! `x` to the proposal `y` with probability `min{1, w(x)/w(y)}` satisfies
//! detailed balance with respect to `f`. Under the log-normal mixture the
//! debiased density is also available in closed form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dpmm::ChainState;
use crate::error::{Error, Result};
use crate::stats::LogNormalMixture;

/// Biasing weight `w(y) > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFn {
    /// `w(y) = y`.
    Length,
    /// `w(y) = y^p`.
    Power { p: f64 },
    /// Piecewise-linear through `(x, w)`, constant beyond the end points.
    Tabulated { x: Vec<f64>, w: Vec<f64> },
}

impl WeightFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightFn::Length => Ok(()),
            WeightFn::Power { p } if p.is_finite() => Ok(()),
            WeightFn::Power { p } => Err(Error::Config(format!("weight exponent {p} is not finite"))),
            WeightFn::Tabulated { x, w } => {
                if x.is_empty() || x.len() != w.len() {
                    return Err(Error::Config("tabulated weight needs matching, nonempty x and w".into()));
                }
                if x.windows(2).any(|p| !(p[1] > p[0])) || x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("tabulated weight abscissae must increase strictly".into()));
                }
                if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(Error::Config("tabulated weights must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// The exponent when `w(y) = y^p`.
    pub fn power(&self) -> Option<f64> {
        match self {
            WeightFn::Length => Some(1.0),
            WeightFn::Power { p } => Some(*p),
            WeightFn::Tabulated { .. } => None,
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("weight function needs y > 0, got {y}")));
        }
        match self {
            WeightFn::Length => Ok(y),
            WeightFn::Power { p } => Ok(y.powf(*p)),
            WeightFn::Tabulated { x, w } => {
                let k = x.partition_point(|&xi| xi <= y);
                Ok(if k == 0 {
                    w[0]
                } else if k == x.len() {
                    w[k - 1]
                } else {
                    let t = (y - x[k - 1]) / (x[k] - x[k - 1]);
                    w[k - 1] + t * (w[k] - w[k - 1])
                })
            }
        }
    }
}

/// `min{1, w(x_prev) / w(y_prop)}`.
pub fn accept_probability(x_prev: f64, y_prop: f64, w: &WeightFn) -> Result<f64> {
    if !(x_prev > 0.0 && y_prop > 0.0) {
        return Err(Error::Domain(format!(
            "acceptance needs positive states, got x = {x_prev}, y = {y_prop}"
        )));
    }
    let ratio = match w {
        WeightFn::Length => x_prev / y_prop,
        // (x/y)^p avoids overflow of the separate powers
        WeightFn::Power { p } => (x_prev / y_prop).powf(*p),
        WeightFn::Tabulated { .. } => w.eval(x_prev)? / w.eval(y_prop)?,
    };
    Ok(ratio.min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebiasChain {
    pub x_current: f64,
    pub accept_count: usize,
    pub step_count: usize,
    pub history: Option<Vec<f64>>,
}

impl DebiasChain {
    pub fn new(x0: f64) -> Result<Self> {
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::Domain(format!("debias chain must start at a positive state, got {x0}")));
        }
        Ok(Self {
            x_current: x0,
            accept_count: 0,
            step_count: 0,
            history: None,
        })
    }

    /// Like [`DebiasChain::new`] but records every retained state.
    pub fn with_history(x0: f64) -> Result<Self> {
        let mut chain = Self::new(x0)?;
        chain.history = Some(Vec::new());
        Ok(chain)
    }

    /// One Metropolis step; returns whether the proposal was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, y_prop: f64, w: &WeightFn, rng: &mut R) -> Result<bool> {
        let p = accept_probability(self.x_current, y_prop, w)?;
        let accepted = rng.random::<f64>() < p;
        if accepted {
            self.x_current = y_prop;
            self.accept_count += 1;
        }
        self.step_count += 1;
        if let Some(h) = self.history.as_mut() {
            h.push(self.x_current);
        }
        Ok(accepted)
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.step_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.step_count as f64
        }
    }
}

/// Advances `chain` by one proposal.
pub fn debias_step<R: Rng + ?Sized>(
    chain: &mut DebiasChain,
    y_prop: f64,
    w: &WeightFn,
    rng: &mut R,
) -> Result<bool> {
    chain.step(y_prop, w, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DebiasRun {
    /// Retained state after each proposal.
    pub samples: Vec<f64>,
    /// Fraction of proposals accepted so far, after each step.
    pub acceptance_running: Vec<f64>,
    pub accept_count: usize,
}

impl DebiasRun {
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_running.last().copied().unwrap_or(0.0)
    }
}

/// Runs the chain from `x0` over a stream of proposals.
pub fn run_debias<R: Rng + ?Sized>(
    proposals: impl IntoIterator<Item = f64>,
    x0: f64,
    w: &WeightFn,
    rng: &mut R,
) -> Result<DebiasRun> {
    w.validate()?;
    let mut chain = DebiasChain::new(x0)?;
    let proposals = proposals.into_iter();
    let cap = proposals.size_hint().0;
    let mut samples = Vec::with_capacity(cap);
    let mut acceptance_running = Vec::with_capacity(cap);
    for y in proposals {
        chain.step(y, w, rng)?;
        samples.push(chain.x_current);
        acceptance_running.push(chain.acceptance_rate());
    }
    Ok(DebiasRun {
        samples,
        acceptance_running,
        accept_count: chain.accept_count,
    })
}

/// `c = integral of y^-1 g(y | state) dy
///    = sum_j w_j exp(-mu_j + 1/(2 lambda)) + (1 - sum_j w_j) exp(1/(2s) + 1/(2 lambda))`.
pub fn debias_normalizer(state: &ChainState) -> f64 {
    state.predictive_mixture().negative_power_moment(1.0)
}

/// The density proportional to `g(y | state) / w(y)` as a log-normal
/// mixture, for power weights. `None` for tabulated weights.
pub fn debiased_mixture(state: &ChainState, w: &WeightFn) -> Option<LogNormalMixture> {
    w.power().map(|p| state.predictive_mixture().power_tilt(p))
}

/// `y^-1 g(y | state) / c`.
pub fn exact_debias_density(state: &ChainState, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("debiased density needs y > 0, got {y}")));
    }
    Ok(crate::dpmm::mixture_density(state, y)? / (y * debias_normalizer(state)))
}

/// Distribution function of [`exact_debias_density`].
pub fn exact_debias_cdf(state: &ChainState, y: f64) -> f64 {
    state.predictive_mixture().power_tilt(1.0).cdf(y)
}
