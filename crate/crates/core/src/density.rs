//! Density values tabulated on an evaluation grid.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Checks that `grid` has at least two finite, strictly increasing points.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Config(format!("grid needs at least 2 points, got {}", grid.len())));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("grid contains non-finite points".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `points` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!(
            "cannot build a grid of {points} points on [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    grid[points - 1] = hi;
    Ok(grid)
}

/// Default evaluation grid: `points` values on `[0, factor * max(data)]`.
pub fn default_grid(data: &[f64], factor: f64, points: usize) -> Result<Vec<f64>> {
    let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::Data("default grid needs a positive observation".into()));
    }
    linspace(0.0, factor * max, points)
}

/// Trapezoid rule for tabulated values.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Rescaled so that the trapezoid integral over `grid` is one.
    pub normalized: bool,
    /// Analytic mass outside the grid, when known. For estimates that are
    /// not renormalized, `integral + tail_mass` is the total mass.
    pub tail_mass: Option<f64>,
}

impl DensityEstimate {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if grid.len() != values.len() {
            return Err(Error::Config(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
            tail_mass: None,
        })
    }

    /// Tabulates `f` on `grid`.
    pub fn tabulate(grid: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        validate_grid(grid)?;
        Self::new(grid.to_vec(), grid.iter().map(|&x| f(x)).collect())
    }

    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Rescales to unit trapezoid integral.
    pub fn normalize(mut self) -> Result<Self> {
        let total = self.integral();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Numerical(format!(
                "cannot normalize an estimate with integral {total}"
            )));
        }
        self.values.iter_mut().for_each(|v| *v /= total);
        self.normalized = true;
        Ok(self)
    }

    pub fn same_grid(&self, other: &DensityEstimate) -> bool {
        self.grid == other.grid
    }

    /// Writes a two-column `grid,value` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["grid", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::Data(format!("line {line}: expected 2 columns")));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Data(format!("line {line}: '{s}' is not a number")))
            };
            grid.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
        }
        Self::new(grid, values)
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, std::io::Error::other(e)))
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
