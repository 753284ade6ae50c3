use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig};
use super::fit::cmd_fit;
use crate::density::DensityEstimate;
use crate::diagnostics::l1_distance;
use crate::error::{Error, Result};
use crate::rng::replicate_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySpec {
    pub ladder: Vec<usize>,
    pub replicates: usize,
}

impl Default for ConsistencySpec {
    fn default() -> Self {
        Self { ladder: vec![50, 200, 800], replicates: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub replicates: usize,
    pub mean_l1: f64,
    pub sd_l1: f64,
}

pub fn write_table<W: Write>(rows: &[ConsistencyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)
            .map_err(|e| Error::Numerical(format!("writing consistency table: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("<consistency>", e))
}

/// Mean L1 distance between the debiased density and the unbiased truth
/// for every sample size in the ladder, over independent replicates.
///
/// Rungs and replicates run in parallel; replicate `r` always uses
/// `replicate_seed(config.seed, r)`, so the table is reproducible.
pub fn cmd_consistency(config: &ExperimentConfig, spec: &ConsistencySpec) -> Result<Vec<ConsistencyRow>> {
    let DataSource::Synthetic { dist, .. } = &config.data else {
        return Err(Error::Config("consistency runs need a synthetic truth".into()));
    };
    let power = config
        .weight
        .power()
        .ok_or_else(|| Error::Config("consistency runs need a power weight".into()))?;
    let truth = dist
        .power_debiased(power)
        .ok_or_else(|| Error::Config("the synthetic truth has no closed-form debiased density".into()))?;
    if spec.ladder.is_empty() || spec.replicates == 0 {
        return Err(Error::Config("consistency needs a nonempty ladder and replicates".into()));
    }

    let jobs: Vec<(usize, usize)> = spec
        .ladder
        .iter()
        .flat_map(|&n| (0..spec.replicates).map(move |r| (n, r)))
        .collect();
    let distances: Vec<f64> = jobs
        .par_iter()
        .map(|&(n, r)| {
            let cfg = config.clone().with_n(n).with_seed(replicate_seed(config.seed, r as u64));
            let report = cmd_fit(&cfg)?;
            if let Some(f) = &report.failure {
                return Err(Error::Numerical(format!("n = {n}, replicate {r}: {}", f.message)));
            }
            let est = report
                .debiased_density
                .ok_or_else(|| Error::Config("run produced no debiased density".into()))?;
            let t = DensityEstimate::tabulate(&est.grid, |y| truth.pdf(y).unwrap_or(0.0))?;
            l1_distance(&est, &t)
        })
        .collect::<Result<_>>()?;

    Ok(spec
        .ladder
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let d = &distances[k * spec.replicates..(k + 1) * spec.replicates];
            let m = d.len() as f64;
            let mean = d.iter().sum::<f64>() / m;
            let sd = if d.len() > 1 {
                (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            ConsistencyRow { n, replicates: d.len(), mean_l1: mean, sd_l1: sd }
        })
        .collect())
}
