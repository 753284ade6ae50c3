use super::config::{DataSource, ExperimentConfig};
use super::io::load_csv;
use super::report::{ReportFailure, RunReport, Truth};
use crate::debias::{debiased_mixture, DebiasChain, WeightFn};
use crate::density::DensityEstimate;
use crate::diagnostics::{acf, average_clusters, running_average, TraceSummary, DEFAULT_MAX_LAG};
use crate::dpmm::{run_chain, ChainObserver, ChainState, Dataset};
use crate::error::{Error, Result};
use crate::kde::{classical_kde, jones_kde, select_bandwidth, Bandwidth};
use crate::rng::{stream_rng, streams, StreamRng};
use crate::stats::Dist;

/// `n` i.i.d. draws from `dist` on the data stream of `seed`.
pub fn gen_synthetic(dist: &Dist, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("synthetic sample size must be positive".into()));
    }
    let mut rng = stream_rng(seed, streams::DATA);
    Dataset::new(dist.sample_n(n, &mut rng)?)
}

/// Runs the debias chain on the predictive stream and accumulates the
/// averaged closed-form debiased density.
struct DebiasHook<'a> {
    chain: DebiasChain,
    weight: &'a WeightFn,
    rng: StreamRng,
    grid: &'a [f64],
    density_sum: Option<Vec<f64>>,
    tail_sum: f64,
    kept: usize,
    samples: Vec<f64>,
    acceptance_running: Vec<f64>,
}

impl ChainObserver for DebiasHook<'_> {
    fn on_kept(&mut self, state: &ChainState, draw: f64) -> Result<()> {
        self.chain.step(draw, self.weight, &mut self.rng)?;
        self.samples.push(self.chain.x_current);
        self.acceptance_running.push(self.chain.acceptance_rate());
        self.kept += 1;
        if let (Some(sum), Some(mix)) = (self.density_sum.as_mut(), debiased_mixture(state, self.weight)) {
            for (acc, &y) in sum.iter_mut().zip(self.grid) {
                if y > 0.0 {
                    *acc += mix.pdf(y)?;
                }
            }
            self.tail_sum += mix.mass_outside(self.grid[0], self.grid[self.grid.len() - 1]);
        }
        Ok(())
    }
}

fn load_data(config: &ExperimentConfig) -> Result<(Dataset, Option<Truth>)> {
    match &config.data {
        DataSource::Csv { path } => Ok((load_csv(path)?, None)),
        DataSource::Synthetic { dist, n } => {
            let data = gen_synthetic(dist, *n, config.seed)?;
            let unbiased = config.weight.power().and_then(|p| dist.power_debiased(p));
            Ok((
                data,
                Some(Truth {
                    biased: dist.clone(),
                    unbiased,
                }),
            ))
        }
    }
}

fn trace_summary(predictive: &[f64], debiased: &[f64], acceptance: Vec<f64>, clusters: Vec<usize>) -> TraceSummary {
    let acf = if predictive.len() >= 2 {
        acf(predictive, DEFAULT_MAX_LAG.min(predictive.len() - 1)).unwrap_or_default()
    } else {
        Vec::new()
    };
    TraceSummary {
        running_mean: running_average(debiased).unwrap_or_default(),
        predictive_running_mean: running_average(predictive).unwrap_or_default(),
        acf,
        acceptance_running: acceptance,
        cluster_counts: clusters,
    }
}

/// Fits the mixture to the biased sample, runs the debias chain on its
/// predictive draws and computes the kernel baselines.
///
/// Configuration and data errors are returned as `Err`. Failures after
/// sampling has started produce a report flagged invalid that carries
/// whatever was computed.
pub fn cmd_fit(config: &ExperimentConfig) -> Result<RunReport> {
    let mut config = config.clone();
    config.hyper.seed = config.seed;
    config.validate()?;
    let (data, truth) = load_data(&config)?;
    let grid = config.grid.build(data.y())?;
    let x0 = config.x0.unwrap_or(data.y()[0]);

    let mut hook = DebiasHook {
        chain: DebiasChain::new(x0)?,
        weight: &config.weight,
        rng: stream_rng(config.seed, streams::DEBIAS),
        grid: &grid,
        density_sum: config.weight.power().map(|_| vec![0.0; grid.len()]),
        tail_sum: 0.0,
        kept: 0,
        samples: Vec::new(),
        acceptance_running: Vec::new(),
    };
    let mut gibbs_rng = stream_rng(config.seed, streams::GIBBS);
    let (predictive, cluster_counts, predictive_density, mut failure) =
        match run_chain(&data, &config.hyper, &grid, &mut gibbs_rng, &mut hook) {
            Ok(run) => (run.predictive, run.cluster_counts, run.density, run.failure.as_ref().map(ReportFailure::from)),
            // the chain could not start (e.g. the truncation guard tripped at
            // initialization): report what we have, flagged invalid
            Err(e @ (Error::Numerical(_) | Error::DegenerateConditional(_) | Error::Truncation { .. })) => {
                let empty = DensityEstimate::new(grid.clone(), vec![0.0; grid.len()])?;
                (Vec::new(), Vec::new(), empty, Some(ReportFailure::from(&e)))
            }
            Err(e) => return Err(e),
        };
    if failure.is_none() && predictive.is_empty() {
        failure = Some(ReportFailure::from(&Error::Numerical("no kept iterations".into())));
    }

    let kept = hook.kept.max(1) as f64;
    let debiased_density = match hook.density_sum.take() {
        Some(sum) => {
            let mut est = DensityEstimate::new(grid.clone(), sum.into_iter().map(|v| v / kept).collect())?;
            est.tail_mass = Some(hook.tail_sum / kept);
            Some(est)
        }
        None => None,
    };

    let bandwidth = match config.bandwidth {
        Some(h) => Ok(Bandwidth::manual(h)?),
        None => select_bandwidth(data.y()),
    };
    let (bandwidth, classical, jones) = match bandwidth {
        Ok(bw) => {
            let kdes = classical_kde(data.y(), &bw, &grid).and_then(|c| Ok((c, jones_kde(data.y(), &bw, &grid)?)));
            match kdes {
                Ok((c, j)) => (Some(bw), Some(c), Some(j)),
                Err(e) => {
                    failure.get_or_insert_with(|| ReportFailure::from(&e));
                    (Some(bw), None, None)
                }
            }
        }
        Err(e) => {
            failure.get_or_insert_with(|| ReportFailure::from(&e));
            (None, None, None)
        }
    };

    let average = average_clusters(&cluster_counts).ok();
    let acceptance_rate = hook.chain.acceptance_rate();
    let trace = trace_summary(&predictive, &hook.samples, hook.acceptance_running, cluster_counts);

    Ok(RunReport {
        data: data.y().to_vec(),
        predictive_sample: predictive,
        debiased_sample: hook.samples,
        predictive_density,
        debiased_density,
        classical_kde: classical,
        jones_kde: jones,
        trace,
        average_clusters: average,
        acceptance_rate,
        bandwidth,
        truth,
        failure,
        config,
    })
}
