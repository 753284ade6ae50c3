//! Configuration, data ingestion, experiment orchestration and output.

mod compare;
mod config;
mod consistency;
mod fit;
mod io;
mod report;

pub mod cli;

pub use compare::{cmd_compare, Comparison, ComparisonRow};
pub use config::{DataSource, ExperimentConfig, GridSpec, Preset};
pub use consistency::{cmd_consistency, write_table, ConsistencyRow, ConsistencySpec};
pub use fit::{cmd_fit, gen_synthetic};
pub use io::{load_csv, parse_csv, write_sample_csv};
pub use report::{ReportFailure, RunReport, Summary, Truth};
