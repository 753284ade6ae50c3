use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::StoredReport;
use crate::density::DensityEstimate;
use crate::diagnostics::l1_distance;
use crate::error::{Error, Result};
use crate::stats::Dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// `truth` or `pairwise`.
    pub kind: String,
    pub method: String,
    pub report_a: String,
    /// Second report for pairwise rows; empty for truth rows.
    pub report_b: String,
    /// `unbiased` or `biased` for truth rows; empty for pairwise rows.
    pub target: String,
    pub l1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Numerical(format!("writing comparison: {e}")))?;
        }
        w.flush().map_err(|e| Error::io("<comparison>", e))
    }

    /// Truth-distance rows for one method, in report order.
    pub fn truth_l1(&self, method: &str, target: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.kind == "truth" && r.method == method && r.target == target)
            .map(|r| r.l1)
            .collect()
    }
}

fn truth_l1(est: &DensityEstimate, truth: &Dist) -> Result<f64> {
    let t = DensityEstimate::tabulate(&est.grid, |y| truth.pdf(y).unwrap_or(0.0))?;
    truth.validate()?;
    l1_distance(est, &t)
}

/// L1 distances of every stored estimate to the known truth (biased and
/// unbiased), and between the same estimate across every pair of reports.
pub fn cmd_compare(dirs: &[PathBuf]) -> Result<Comparison> {
    if dirs.is_empty() {
        return Err(Error::Config("compare needs at least one report".into()));
    }
    let reports: Vec<StoredReport> = dirs.iter().map(|d| StoredReport::read(d)).collect::<Result<_>>()?;
    let name = |p: &Path| p.display().to_string();

    let reference = reports[0].estimates.first().map(|(_, e)| &e.grid);
    for (dir, rep) in dirs.iter().zip(&reports) {
        for (method, est) in &rep.estimates {
            if Some(&est.grid) != reference {
                return Err(Error::Config(format!(
                    "{} ({method}) is on a different grid than {}",
                    name(dir),
                    name(&dirs[0])
                )));
            }
        }
    }

    let mut rows = Vec::new();
    for (dir, rep) in dirs.iter().zip(&reports) {
        let Some(truth) = &rep.summary.truth else { continue };
        for (method, est) in &rep.estimates {
            let targets = [("unbiased", truth.unbiased.as_ref()), ("biased", Some(&truth.biased))];
            for (target, dist) in targets {
                if let Some(dist) = dist {
                    rows.push(ComparisonRow {
                        kind: "truth".into(),
                        method: method.to_string(),
                        report_a: name(dir),
                        report_b: String::new(),
                        target: target.into(),
                        l1: truth_l1(est, dist)?,
                    });
                }
            }
        }
    }
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            for (method, a) in &reports[i].estimates {
                if let Some((_, b)) = reports[j].estimates.iter().find(|(m, _)| m == method) {
                    rows.push(ComparisonRow {
                        kind: "pairwise".into(),
                        method: method.to_string(),
                        report_a: name(&dirs[i]),
                        report_b: name(&dirs[j]),
                        target: String::new(),
                        l1: l1_distance(a, b)?,
                    });
                }
            }
        }
    }
    Ok(Comparison { rows })
}
