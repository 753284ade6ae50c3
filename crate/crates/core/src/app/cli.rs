//! Command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::compare::cmd_compare;
use super::config::{DataSource, ExperimentConfig, GridSpec, Preset};
use super::consistency::{cmd_consistency, write_table, ConsistencySpec};
use super::fit::cmd_fit;
use crate::debias::WeightFn;
use crate::dpmm::Hyperparams;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "lengthbias", version, about = "Bayesian density estimation from length-biased samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the mixture model, debias its predictive draws and write a report directory.
    Fit(FitArgs),
    /// Compare written reports by L1 distance (CSV on stdout).
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Also write compare.csv and compare.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean L1 error of the debiased density over a ladder of sample sizes.
    Consistency {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_delimiter = ',', default_value = "50,200,800")]
        ladder: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        replicates: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV file with one column of positive observations.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Synthetic sample size (defaults to the preset's).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    /// DP concentration.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Base-measure precision.
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    /// `improper`, `informative` (= 3,0.01) or `a,b`.
    #[arg(long, default_value = "improper")]
    pub lambda_prior: String,
    /// `length` or `power:<p>`.
    #[arg(long, default_value = "length")]
    pub weight: String,
    /// Positive number or `auto`.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    /// Start of the debias chain (defaults to the first observation).
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_lambda_prior(s: &str) -> Result<(f64, f64)> {
    match s.trim() {
        "improper" => Ok((0.0, 0.0)),
        "informative" => Ok((3.0, 0.01)),
        other => {
            let parts: Vec<&str> = other.split(',').collect();
            let parsed: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
            match parsed.as_deref() {
                Some(&[a, b]) => Ok((a, b)),
                _ => Err(Error::Config(format!(
                    "--lambda-prior expects 'improper', 'informative' or 'a,b', got '{other}'"
                ))),
            }
        }
    }
}

fn parse_weight(s: &str) -> Result<WeightFn> {
    let s = s.trim();
    if s == "length" {
        return Ok(WeightFn::Length);
    }
    if let Some(p) = s.strip_prefix("power:") {
        if let Ok(p) = p.trim().parse::<f64>() {
            return Ok(WeightFn::Power { p });
        }
    }
    Err(Error::Config(format!("--weight expects 'length' or 'power:<p>', got '{s}'")))
}

fn parse_bandwidth(s: &str) -> Result<Option<f64>> {
    match s.trim() {
        "auto" => Ok(None),
        other => other
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Config(format!("--bandwidth expects a number or 'auto', got '{other}'"))),
    }
}

impl FitArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let data = match (&self.data, self.preset) {
            (Some(path), None) => DataSource::Csv { path: path.clone() },
            (None, Some(preset)) => DataSource::Synthetic {
                dist: preset.biased_dist(),
                n: self.n.unwrap_or(preset.default_n()),
            },
            _ => return Err(Error::Config("give exactly one of --data or --preset".into())),
        };
        let (a, b) = parse_lambda_prior(&self.lambda_prior)?;
        let config = ExperimentConfig {
            data,
            hyper: Hyperparams {
                a,
                b,
                s: self.s,
                c: self.c,
                n_iter: self.iters,
                burn_in: self.burnin,
                thin: self.thin,
                n_max: self.n_max,
                seed: self.seed,
            },
            weight: parse_weight(&self.weight)?,
            grid: GridSpec { max: self.grid_max, points: self.grid_points },
            bandwidth: parse_bandwidth(&self.bandwidth)?,
            x0: self.x0,
            seed: self.seed,
            out_dir: self.out.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Fit(args) => {
            let config = args.to_config()?;
            let report = cmd_fit(&config)?;
            if let Some(dir) = &config.out_dir {
                report.write_to(dir)?;
            }
            let summary = serde_json::to_string_pretty(&report.summary())
                .map_err(|e| Error::Numerical(e.to_string()))?;
            println!("{summary}");
            if let Some(f) = &report.failure {
                eprintln!("error: {}", f.message);
            }
            Ok(report.exit_code())
        }
        Command::Compare { reports, out } => {
            let cmp = cmd_compare(&reports)?;
            let mut buf = Vec::new();
            cmp.write_csv(&mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                write_file(&dir.join("compare.csv"), &buf)?;
                let json = serde_json::to_string_pretty(&cmp).map_err(|e| Error::Numerical(e.to_string()))?;
                write_file(&dir.join("compare.json"), json.as_bytes())?;
            }
            Ok(0)
        }
        Command::Consistency { fit, ladder, replicates } => {
            let config = fit.to_config()?;
            let rows = cmd_consistency(&config, &ConsistencySpec { ladder, replicates })?;
            let mut buf = Vec::new();
            write_table(&rows, &mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
            if let Some(dir) = &config.out_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                write_file(&dir.join("consistency.csv"), &buf)?;
                let json = serde_json::to_string_pretty(&rows).map_err(|e| Error::Numerical(e.to_string()))?;
                write_file(&dir.join("consistency.json"), json.as_bytes())?;
            }
            Ok(0)
        }
    }
}
