use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::debias::WeightFn;
use crate::dpmm::Hyperparams;
use crate::error::{Error, Result};
use crate::stats::Dist;

/// Synthetic setups matching the two simulation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `g = Ga(2, 0.5)`, `n = 50`; under length bias `f = Exp(0.5)`.
    Gamma1,
    /// `g = 0.25 Ga(2, 1) + 0.75 Ga(10, 1)`, `n = 70`; `f = 0.75 Ga(1, 1) + 0.25 Ga(9, 1)`.
    Mixture2,
}

impl Preset {
    pub fn biased_dist(self) -> Dist {
        match self {
            Preset::Gamma1 => Dist::gamma(2.0, 0.5),
            Preset::Mixture2 => Dist::mixture([(0.25, Dist::gamma(2.0, 1.0)), (0.75, Dist::gamma(10.0, 1.0))]),
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            Preset::Gamma1 => 50,
            Preset::Mixture2 => 70,
        }
    }

    pub fn source(self) -> DataSource {
        DataSource::Synthetic {
            dist: self.biased_dist(),
            n: self.default_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// One numeric column, optional header.
    Csv { path: PathBuf },
    /// `n` draws from the biased density `dist`.
    Synthetic { dist: Dist, n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Upper end; defaults to `1.5 * max(data)`.
    pub max: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { max: None, points: 512 }
    }
}

impl GridSpec {
    pub const DEFAULT_FACTOR: f64 = 1.5;

    pub fn build(&self, data: &[f64]) -> Result<Vec<f64>> {
        match self.max {
            Some(max) => crate::density::linspace(0.0, max, self.points),
            None => crate::density::default_grid(data, Self::DEFAULT_FACTOR, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub hyper: Hyperparams,
    pub weight: WeightFn,
    pub grid: GridSpec,
    /// Fixed KDE bandwidth; selected from the data when absent.
    pub bandwidth: Option<f64>,
    /// Start of the debias chain; defaults to the first observation.
    pub x0: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: DataSource) -> Self {
        Self {
            data,
            hyper: Hyperparams::default(),
            weight: WeightFn::Length,
            grid: GridSpec::default(),
            bandwidth: None,
            x0: None,
            seed: 0,
            out_dir: None,
        }
    }

    pub fn preset(preset: Preset) -> Self {
        Self::new(preset.source())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.hyper.seed = seed;
        self
    }

    pub fn with_iterations(mut self, n_iter: usize, burn_in: usize, thin: usize) -> Self {
        self.hyper.n_iter = n_iter;
        self.hyper.burn_in = burn_in;
        self.hyper.thin = thin;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        if let DataSource::Synthetic { n: ref mut m, .. } = self.data {
            *m = n;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        self.weight.validate()?;
        if let DataSource::Synthetic { dist, n } = &self.data {
            dist.validate()?;
            if *n == 0 {
                return Err(Error::Config("synthetic sample size must be positive".into()));
            }
        }
        if self.grid.points < 2 {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        if let Some(max) = self.grid.max {
            if !(max > 0.0 && max.is_finite()) {
                return Err(Error::Config(format!("grid max must be positive, got {max}")));
            }
        }
        if let Some(h) = self.bandwidth {
            crate::kde::Bandwidth::manual(h)?;
        }
        if let Some(x0) = self.x0 {
            if !(x0 > 0.0 && x0.is_finite()) {
                return Err(Error::Config(format!("x0 must be positive, got {x0}")));
            }
        }
        Ok(())
    }
}
