//! Dirichlet-process mixture of log-normals fitted to the biased sample.
//!
//! The model is
//!
//! ```text
//! y_i | mu_i, lambda ~ LN(mu_i, 1/lambda)
//! mu_i | P           ~ P,   P ~ DP(c, N(0, 1/s))
//! lambda             ~ Ga(a, b)   (a = b = 0: improper 1/lambda)
//! ```
//!
//! and is sampled with the slice-augmented stick-breaking Gibbs sampler in
//! [`gibbs`]. Allocation indices are zero-based.

mod gibbs;
mod run;

pub use gibbs::{
    allocation_probabilities, ensure_coverage, gibbs_sweep, update_atoms, update_lambda,
    update_slices_allocations, update_sticks,
};
pub use run::{run_chain, ChainObserver, ChainRun};

use rand::Rng;
use rand_distr::{Beta, Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{LogNormalMixture, LogNormalParams};

/// Largest stick fraction kept, so that every tail product stays positive.
pub(crate) const V_MAX: f64 = 1.0 - f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Shape of the gamma prior on the precision; `a = b = 0` is `1/lambda`.
    pub a: f64,
    /// Rate of the gamma prior on the precision.
    pub b: f64,
    /// Precision of the base measure `N(0, 1/s)`.
    pub s: f64,
    /// DP concentration.
    pub c: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Hard cap on instantiated components; `None` means `10 n + 100`.
    pub n_max: Option<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            s: 0.5,
            c: 1.0,
            n_iter: 60_000,
            burn_in: 10_000,
            thin: 10,
            n_max: None,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.a >= 0.0 && self.b >= 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return bad(format!("precision prior needs a, b >= 0, got ({}, {})", self.a, self.b));
        }
        if (self.a == 0.0) != (self.b == 0.0) {
            return bad(format!(
                "precision prior (a, b) must be jointly zero or jointly positive, got ({}, {})",
                self.a, self.b
            ));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return bad(format!("base precision s must be positive, got {}", self.s));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("concentration c must be positive, got {}", self.c));
        }
        if self.n_iter == 0 {
            return bad("n_iter must be positive".into());
        }
        if self.burn_in >= self.n_iter {
            return bad(format!(
                "burn_in ({}) must be smaller than n_iter ({})",
                self.burn_in, self.n_iter
            ));
        }
        if self.thin == 0 {
            return bad("thin must be positive".into());
        }
        if self.n_max == Some(0) {
            return bad("n_max must be positive".into());
        }
        Ok(())
    }

    pub fn improper_precision_prior(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    pub fn truncation_limit(&self, n: usize) -> usize {
        self.n_max.unwrap_or(10 * n + 100)
    }

    /// Whether 1-based iteration `t` is kept for output.
    pub fn is_kept(&self, t: usize) -> bool {
        t > self.burn_in && (t - self.burn_in - 1).is_multiple_of(self.thin)
    }

    pub fn kept_count(&self) -> usize {
        (self.n_iter - self.burn_in).div_ceil(self.thin)
    }
}

/// Biased observations with cached logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    log_y: Vec<f64>,
}

impl Dataset {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Data("dataset is empty".into()));
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Data(format!(
                "observation {} is {v}; all observations must be positive and finite",
                i + 1
            )));
        }
        let log_y = y.iter().map(|v| v.ln()).collect();
        Ok(Self { y, log_y })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn log_y(&self) -> &[f64] {
        &self.log_y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Full Gibbs state of the slice sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    /// Stick fractions, one per instantiated component.
    pub v: Vec<f64>,
    /// `w_j = v_j prod_{l<j} (1 - v_l)`.
    pub w: Vec<f64>,
    /// Component locations (of `log y`).
    pub mu: Vec<f64>,
    /// Common precision of `log y` within a component.
    pub lambda: f64,
    /// Slice levels, one per observation.
    pub u: Vec<f64>,
    /// Zero-based allocation of each observation.
    pub d: Vec<usize>,
    /// Base-measure precision, carried for predictive quantities.
    pub s: f64,
    pub iteration: usize,
}

impl ChainState {
    /// Builds a state from sticks and atoms, computing the weights.
    /// Slices and allocations are left empty.
    pub fn from_sticks(v: Vec<f64>, mu: Vec<f64>, lambda: f64, s: f64) -> Result<Self> {
        if v.len() != mu.len() {
            return Err(Error::Config("sticks and atoms differ in length".into()));
        }
        if v.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return Err(Error::Config("stick fractions must lie in (0, 1)".into()));
        }
        LogNormalParams::new(0.0, lambda)?;
        if !(s > 0.0) {
            return Err(Error::Config(format!("base precision must be positive, got {s}")));
        }
        let mut state = Self {
            w: Vec::with_capacity(v.len()),
            v,
            mu,
            lambda,
            u: Vec::new(),
            d: Vec::new(),
            s,
            iteration: 0,
        };
        state.recompute_weights();
        Ok(state)
    }

    /// Builds a state from explicit weights with `sum(w) < 1` (or `<= 1`
    /// when the last stick closes the remainder).
    pub fn from_weights(w: &[f64], mu: Vec<f64>, lambda: f64, s: f64) -> Result<Self> {
        let mut v = Vec::with_capacity(w.len());
        let mut rem = 1.0;
        for &wj in w {
            if !(wj > 0.0) || wj > rem * (1.0 + 1e-12) {
                return Err(Error::Config("weights must be positive and sum to at most 1".into()));
            }
            v.push((wj / rem).min(V_MAX));
            rem -= wj;
        }
        Self::from_sticks(v, mu, lambda, s)
    }

    pub fn n_active(&self) -> usize {
        self.v.len()
    }

    pub fn recompute_weights(&mut self) {
        self.w.clear();
        let mut rem = 1.0;
        for &v in &self.v {
            self.w.push(v * rem);
            rem *= 1.0 - v;
        }
    }

    /// `sum_{j<N} w_j`, summed in index order.
    pub fn covered_mass(&self) -> f64 {
        self.w.iter().sum()
    }

    pub fn min_slice(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Number of observations per instantiated component.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_active()];
        for &d in &self.d {
            counts[d] += 1;
        }
        counts
    }

    /// Number of distinct allocations.
    pub fn cluster_count(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }

    /// Checks every structural invariant of the sampler state.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n_comp = self.n_active();
        if self.w.len() != n_comp || self.mu.len() != n_comp {
            return Err("v, w and mu lengths differ".into());
        }
        if self.u.len() != self.d.len() {
            return Err("u and d lengths differ".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(format!("lambda = {} is not a positive number", self.lambda));
        }
        let mut rem = 1.0;
        let mut partial = 0.0;
        for (j, (&v, &w)) in self.v.iter().zip(&self.w).enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("v[{j}] = {v} outside (0, 1)"));
            }
            if w != v * rem {
                return Err(format!("w[{j}] breaks the stick-breaking identity"));
            }
            rem *= 1.0 - v;
            partial += w;
            if partial >= 1.0 {
                return Err(format!("partial weight sum reaches 1 at component {j}"));
            }
        }
        for (i, (&u, &d)) in self.u.iter().zip(&self.d).enumerate() {
            if d >= n_comp {
                return Err(format!("d[{i}] = {d} is not an instantiated component"));
            }
            if !(u > 0.0 && u < self.w[d]) {
                return Err(format!("slice u[{i}] = {u} not below w[d[{i}]] = {}", self.w[d]));
            }
        }
        if !self.u.is_empty() && !(self.covered_mass() > 1.0 - self.min_slice()) {
            return Err(format!(
                "covered mass {} does not exceed 1 - min u = {}",
                self.covered_mass(),
                1.0 - self.min_slice()
            ));
        }
        Ok(())
    }

    /// Variance of `log y` under a fresh base-measure atom.
    fn base_predictive(&self) -> LogNormalParams {
        let var = 1.0 / self.s + 1.0 / self.lambda;
        LogNormalParams {
            mu: 0.0,
            lambda: 1.0 / var,
        }
    }

    /// The conditional predictive density of a new observation as a
    /// log-normal mixture: the instantiated components plus the uncovered
    /// mass spread over the base measure.
    pub fn predictive_mixture(&self) -> LogNormalMixture {
        let mut components: Vec<(f64, LogNormalParams)> = self
            .w
            .iter()
            .zip(&self.mu)
            .map(|(&w, &mu)| {
                (
                    w,
                    LogNormalParams {
                        mu,
                        lambda: self.lambda,
                    },
                )
            })
            .collect();
        let remainder = (1.0 - self.covered_mass()).max(0.0);
        components.push((remainder, self.base_predictive()));
        LogNormalMixture { components }
    }
}

/// Initial state: quantile split of `log y` into `min(n, 5)` clusters.
pub fn init_chain<R: Rng + ?Sized>(data: &Dataset, hp: &Hyperparams, rng: &mut R) -> Result<ChainState> {
    hp.validate()?;
    let n = data.len();
    let k = n.min(5);
    let log_y = data.log_y();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| log_y[a].total_cmp(&log_y[b]).then(a.cmp(&b)));
    let mut d = vec![0; n];
    for (rank, &i) in order.iter().enumerate() {
        d[i] = rank * k / n;
    }

    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&di, &ly) in d.iter().zip(log_y) {
        sums[di] += ly;
        counts[di] += 1;
    }
    let mu: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();

    let lambda = if n > 1 {
        let mean = log_y.iter().sum::<f64>() / n as f64;
        let var = log_y.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var > 0.0 { 1.0 / var } else { 1.0 }
    } else {
        1.0
    };

    let stick = Beta::new(1.0, hp.c).map_err(|e| Error::Config(e.to_string()))?;
    let v = (0..k)
        .map(|_| stick.sample(rng).clamp(f64::MIN_POSITIVE, V_MAX))
        .collect();
    let mut state = ChainState::from_sticks(v, mu, lambda, hp.s)?;
    state.d = d;
    state.u = state
        .d
        .iter()
        .map(|&di| {
            let r: f64 = Open01.sample(rng);
            r * state.w[di]
        })
        .collect();
    ensure_coverage(&mut state, hp, hp.truncation_limit(n), rng)?;
    Ok(state)
}

/// `sum_j w_j LN(y | mu_j, 1/lambda)` plus the uncovered mass times the
/// base-measure predictive `LN(y | 0, 1/s + 1/lambda)`.
pub fn mixture_density(state: &ChainState, y: f64) -> Result<f64> {
    state.predictive_mixture().pdf(y)
}

/// A posterior-predictive draw and where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveDraw {
    pub y: f64,
    /// Component used; `None` when the uniform fell beyond the covered
    /// mass and a fresh atom was drawn from the base measure.
    pub component: Option<usize>,
}

/// Draws `y_{n+1}` from the conditional predictive by the cumulative-weight rule.
pub fn sample_predictive<R: Rng + ?Sized>(state: &ChainState, rng: &mut R) -> PredictiveDraw {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut component = None;
    for (j, &w) in state.w.iter().enumerate() {
        acc += w;
        if r < acc {
            component = Some(j);
            break;
        }
    }
    let mu = match component {
        Some(j) => state.mu[j],
        None => {
            let z: f64 = StandardNormal.sample(rng);
            z / state.s.sqrt()
        }
    };
    let p = LogNormalParams {
        mu,
        lambda: state.lambda,
    };
    PredictiveDraw {
        y: p.sample(rng),
        component,
    }
}
