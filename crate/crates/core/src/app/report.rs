use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::io::write_sample_csv;
use crate::density::DensityEstimate;
use crate::diagnostics::TraceSummary;
use crate::error::{Error, Result};
use crate::kde::Bandwidth;
use crate::stats::Dist;

/// Known truth for synthetic runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    /// Density the observations were drawn from.
    pub biased: Dist,
    /// Underlying density, when it has a closed form.
    pub unbiased: Option<Dist>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFailure {
    pub exit_code: i32,
    pub message: String,
}

impl From<&Error> for ReportFailure {
    fn from(e: &Error) -> Self {
        Self {
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

/// Everything a `fit` run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub data: Vec<f64>,
    pub predictive_sample: Vec<f64>,
    pub debiased_sample: Vec<f64>,
    /// Posterior-predictive density of the biased observations.
    pub predictive_density: DensityEstimate,
    /// Exact debiased density averaged over kept states (power weights only).
    pub debiased_density: Option<DensityEstimate>,
    pub classical_kde: Option<DensityEstimate>,
    pub jones_kde: Option<DensityEstimate>,
    pub trace: TraceSummary,
    pub average_clusters: Option<f64>,
    pub acceptance_rate: f64,
    pub bandwidth: Option<Bandwidth>,
    pub truth: Option<Truth>,
    pub failure: Option<ReportFailure>,
}

/// Scalar part of a report, stored as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub valid: bool,
    pub failure: Option<ReportFailure>,
    pub n: usize,
    pub kept_draws: usize,
    pub average_clusters: Option<f64>,
    pub acceptance_rate: f64,
    pub bandwidth: Option<Bandwidth>,
    pub predictive_tail_mass: Option<f64>,
    pub debiased_tail_mass: Option<f64>,
    pub truth: Option<Truth>,
}

pub(crate) const METHOD_FILES: [(&str, &str); 4] = [
    ("predictive", "predictive_density.csv"),
    ("debiased", "debiased_density.csv"),
    ("classical_kde", "classical_kde.csv"),
    ("jones_kde", "jones_kde.csv"),
];

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_samples(path: &Path, values: &[f64]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_sample_csv(std::io::BufWriter::new(f), values).map_err(|e| Error::io(path, e))
}

impl RunReport {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }

    /// Process exit status for this report.
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, |f| f.exit_code)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            valid: self.is_valid(),
            failure: self.failure.clone(),
            n: self.data.len(),
            kept_draws: self.predictive_sample.len(),
            average_clusters: self.average_clusters,
            acceptance_rate: self.acceptance_rate,
            bandwidth: self.bandwidth,
            predictive_tail_mass: self.predictive_density.tail_mass,
            debiased_tail_mass: self.debiased_density.as_ref().and_then(|d| d.tail_mass),
            truth: self.truth.clone(),
        }
    }

    fn estimates(&self) -> [(&'static str, Option<&DensityEstimate>); 4] {
        [
            ("predictive", Some(&self.predictive_density)),
            ("debiased", self.debiased_density.as_ref()),
            ("classical_kde", self.classical_kde.as_ref()),
            ("jones_kde", self.jones_kde.as_ref()),
        ]
    }

    /// Writes the run directory: config echo, summary and diagnostics as
    /// JSON, samples as single-column CSVs, densities as `grid,value` CSVs.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("config.json"), &self.config)?;
        write_json(&dir.join("summary.json"), &self.summary())?;
        write_json(&dir.join("diagnostics.json"), &self.trace)?;
        write_samples(&dir.join("data.csv"), &self.data)?;
        write_samples(&dir.join("predictive_sample.csv"), &self.predictive_sample)?;
        write_samples(&dir.join("debiased_sample.csv"), &self.debiased_sample)?;
        for ((name, est), (m, file)) in self.estimates().into_iter().zip(METHOD_FILES) {
            debug_assert_eq!(name, m);
            if let Some(est) = est {
                est.write_csv_file(&dir.join(file))?;
            }
        }
        Ok(())
    }
}

/// The parts of a written report that `compare` needs.
#[derive(Debug, Clone)]
pub(crate) struct StoredReport {
    pub summary: Summary,
    pub estimates: Vec<(&'static str, DensityEstimate)>,
}

impl StoredReport {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join("summary.json");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let summary: Summary = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let mut estimates = Vec::new();
        for (method, file) in METHOD_FILES {
            let p = dir.join(file);
            if p.exists() {
                estimates.push((method, DensityEstimate::read_csv_file(&p)?));
            }
        }
        Ok(Self { summary, estimates })
    }
}
