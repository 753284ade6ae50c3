use rand::Rng;

use super::{gibbs_sweep, init_chain, sample_predictive, ChainState, Dataset, Hyperparams};
use crate::density::{validate_grid, DensityEstimate};
use crate::error::{Error, Result};

/// Receives every kept state together with the predictive draw made from it.
pub trait ChainObserver {
    fn on_kept(&mut self, state: &ChainState, draw: f64) -> Result<()>;
}

impl ChainObserver for () {
    fn on_kept(&mut self, _state: &ChainState, _draw: f64) -> Result<()> {
        Ok(())
    }
}

impl<F: FnMut(&ChainState, f64) -> Result<()>> ChainObserver for F {
    fn on_kept(&mut self, state: &ChainState, draw: f64) -> Result<()> {
        self(state, draw)
    }
}

#[derive(Debug)]
pub struct ChainRun {
    /// One posterior-predictive draw per kept iteration.
    pub predictive: Vec<f64>,
    /// Distinct allocations at each kept iteration.
    pub cluster_counts: Vec<usize>,
    /// `mixture_density` averaged over kept states.
    pub density: DensityEstimate,
    pub final_state: ChainState,
    pub sweeps: usize,
    /// Set when the chain stopped early; the rest of the run is partial.
    pub failure: Option<Error>,
}

impl ChainRun {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none() && !self.predictive.is_empty()
    }

    pub fn kept(&self) -> usize {
        self.predictive.len()
    }
}

/// Runs `hp.n_iter` sweeps from [`init_chain`].
///
/// Errors in the inputs are returned directly; an error during sampling
/// stops the chain and is stored in [`ChainRun::failure`] alongside the
/// output collected so far.
pub fn run_chain<R: Rng + ?Sized, O: ChainObserver + ?Sized>(
    data: &Dataset,
    hp: &Hyperparams,
    grid: &[f64],
    rng: &mut R,
    observer: &mut O,
) -> Result<ChainRun> {
    hp.validate()?;
    validate_grid(grid)?;
    let mut state = init_chain(data, hp, rng)?;

    let kept = hp.kept_count();
    let mut predictive = Vec::with_capacity(kept);
    let mut cluster_counts = Vec::with_capacity(kept);
    let mut density_sum = vec![0.0; grid.len()];
    let mut tail_sum = 0.0;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut failure = None;
    let mut sweeps = 0;

    for t in 1..=hp.n_iter {
        if let Err(e) = gibbs_sweep(&mut state, data, hp, rng) {
            failure = Some(e);
            break;
        }
        sweeps = t;
        if !hp.is_kept(t) {
            continue;
        }
        let draw = sample_predictive(&state, rng).y;
        predictive.push(draw);
        cluster_counts.push(state.cluster_count());
        let mixture = state.predictive_mixture();
        for (acc, &y) in density_sum.iter_mut().zip(grid) {
            if y > 0.0 {
                *acc += mixture.pdf(y).expect("positive grid point");
            }
        }
        tail_sum += mixture.mass_outside(lo, hi);
        if let Err(e) = observer.on_kept(&state, draw) {
            failure = Some(e);
            break;
        }
    }

    let k = predictive.len().max(1) as f64;
    let mut density = DensityEstimate::new(grid.to_vec(), density_sum.iter().map(|v| v / k).collect())?;
    density.tail_mass = Some(tail_sum / k);
    Ok(ChainRun {
        predictive,
        cluster_counts,
        density,
        final_state: state,
        sweeps,
        failure,
    })
}
