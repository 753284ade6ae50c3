//! Full-conditional updates of the slice sampler.
//!
//! One sweep runs, in order: slices and allocations, sticks, atoms,
//! precision. The stick update draws `v | d` with the slices integrated out
//! and then refreshes the slices, so `(v, u) | d` is drawn as a block and the
//! state satisfies every invariant when the sweep returns.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Open01, StandardNormal};

use super::{ChainState, Dataset, Hyperparams, V_MAX};
use crate::error::{Error, Result};
use crate::stats::LogNormalParams;

fn draw_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let beta = Beta::new(a, b).map_err(|e| Error::Numerical(format!("Beta({a}, {b}): {e}")))?;
    Ok(beta.sample(rng).clamp(f64::MIN_POSITIVE, V_MAX))
}

fn draw_slices<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) {
    for (u, &d) in state.u.iter_mut().zip(&state.d) {
        let r: f64 = Open01.sample(rng);
        *u = r * state.w[d];
    }
}

/// Instantiates components from the prior until `sum w_j > 1 - min u`.
pub fn ensure_coverage<R: Rng + ?Sized>(
    state: &mut ChainState,
    hp: &Hyperparams,
    limit: usize,
    rng: &mut R,
) -> Result<()> {
    let target = 1.0 - state.min_slice();
    let mut covered = state.covered_mass();
    let mut rem: f64 = state.v.iter().map(|v| 1.0 - v).product();
    let base_sd = 1.0 / hp.s.sqrt();
    while !(covered > target) {
        if state.n_active() >= limit {
            return Err(Error::Truncation { limit });
        }
        let v = draw_beta(1.0, hp.c, rng)?;
        let w = v * rem;
        rem *= 1.0 - v;
        covered += w;
        let z: f64 = StandardNormal.sample(rng);
        state.v.push(v);
        state.w.push(w);
        state.mu.push(base_sd * z);
    }
    Ok(())
}

/// Drops trailing components that hold no data and are not needed for coverage.
fn trim_unneeded(state: &mut ChainState) {
    let max_d = state.d.iter().copied().max().map_or(0, |d| d + 1);
    let target = 1.0 - state.min_slice();
    let mut covered = 0.0;
    let mut needed = state.n_active();
    for (j, &w) in state.w.iter().enumerate() {
        covered += w;
        if covered > target {
            needed = j + 1;
            break;
        }
    }
    let keep = needed.max(max_d);
    state.v.truncate(keep);
    state.w.truncate(keep);
    state.mu.truncate(keep);
}

/// Normalized `P(d_i = j) ∝ 1(w_j > u_i) LN(y_i | mu_j, 1/lambda)` over the
/// instantiated components.
pub fn allocation_probabilities(state: &ChainState, data: &Dataset, i: usize) -> Vec<f64> {
    let ly = data.log_y()[i];
    let u = state.u[i];
    let mut logp: Vec<f64> = state
        .w
        .iter()
        .zip(&state.mu)
        .map(|(&w, &mu)| {
            if w > u {
                LogNormalParams { mu, lambda: state.lambda }.ln_pdf_from_log(ly)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for lp in logp.iter_mut() {
        *lp = (*lp - max).exp();
        total += *lp;
    }
    logp.iter_mut().for_each(|p| *p /= total);
    logp
}

/// Redraws the slices `u_i ~ U(0, w_{d_i})`, instantiates components until
/// the slice sets are covered, then redraws every allocation.
pub fn update_slices_allocations<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    draw_slices(state, rng);
    trim_unneeded(state);
    ensure_coverage(state, hp, hp.truncation_limit(data.len()), rng)?;

    let sqrt_lambda_ln = 0.5 * state.lambda.ln();
    let mut logp = Vec::with_capacity(state.n_active());
    for i in 0..data.len() {
        let ly = data.log_y()[i];
        let u = state.u[i];
        logp.clear();
        let mut max = f64::NEG_INFINITY;
        for (j, (&w, &mu)) in state.w.iter().zip(&state.mu).enumerate() {
            if w > u {
                let z = ly - mu;
                // terms common to every component are dropped
                let lp = sqrt_lambda_ln - 0.5 * state.lambda * z * z;
                max = max.max(lp);
                logp.push((j, lp));
            }
        }
        // the current component is always in the slice set
        debug_assert!(!logp.is_empty());
        let total: f64 = logp.iter().map(|(_, lp)| (lp - max).exp()).sum();
        let mut r = rng.random::<f64>() * total;
        let mut chosen = logp[logp.len() - 1].0;
        for &(j, lp) in &logp {
            r -= (lp - max).exp();
            if r < 0.0 {
                chosen = j;
                break;
            }
        }
        state.d[i] = chosen;
    }
    Ok(())
}

/// `v_j ~ Beta(1 + n_j, c + sum_{l>j} n_l)`, weights recomputed, then the
/// slices refreshed and coverage restored.
pub fn update_sticks<R: Rng + ?Sized>(
    state: &mut ChainState,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    let counts = state.counts();
    let mut tail: usize = counts.iter().sum();
    for (v, &n_j) in state.v.iter_mut().zip(&counts) {
        tail -= n_j;
        *v = draw_beta(1.0 + n_j as f64, hp.c + tail as f64, rng)?;
    }
    state.recompute_weights();
    if !state.u.is_empty() {
        draw_slices(state, rng);
        ensure_coverage(state, hp, hp.truncation_limit(state.u.len()), rng)?;
    }
    Ok(())
}

/// `mu_j ~ N(lambda S_j / (s + lambda n_j), 1 / (s + lambda n_j))`, where
/// `S_j` sums `log y` over the cluster; empty clusters draw from the base.
pub fn update_atoms<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    let k = state.n_active();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&d, &ly) in state.d.iter().zip(data.log_y()) {
        sums[d] += ly;
        counts[d] += 1;
    }
    for j in 0..k {
        let precision = hp.s + state.lambda * counts[j] as f64;
        let mean = state.lambda * sums[j] / precision;
        let z: f64 = StandardNormal.sample(rng);
        state.mu[j] = mean + z / precision.sqrt();
    }
    Ok(())
}

/// `lambda ~ Ga(a + n/2, b + sum_i (log y_i - mu_{d_i})^2 / 2)`.
pub fn update_lambda<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    let ssr: f64 = state
        .d
        .iter()
        .zip(data.log_y())
        .map(|(&d, &ly)| (ly - state.mu[d]).powi(2))
        .sum();
    let shape = hp.a + 0.5 * data.len() as f64;
    let rate = hp.b + 0.5 * ssr;
    if !(rate > 0.0) {
        return Err(Error::DegenerateConditional(format!(
            "precision conditional Ga({shape}, {rate}) is improper: zero residuals under the 1/lambda prior"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::Numerical(format!("Ga({shape}, {rate}): {e}")))?;
    let draw = gamma.sample(rng);
    if !(draw > 0.0 && draw.is_finite()) {
        return Err(Error::Numerical(format!("precision draw {draw} from Ga({shape}, {rate})")));
    }
    state.lambda = draw;
    Ok(())
}

/// One Gibbs sweep: slices/allocations, sticks, atoms, precision.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &Dataset,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<()> {
    update_slices_allocations(state, data, hp, rng)?;
    update_sticks(state, hp, rng)?;
    update_atoms(state, data, hp, rng)?;
    update_lambda(state, data, hp, rng)?;
    state.iteration += 1;
    Ok(())
}
