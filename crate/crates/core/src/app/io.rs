use std::io::{BufRead, Write};
use std::path::Path;

use crate::dpmm::Dataset;
use crate::error::{Error, Result};

/// Parses one numeric column. A non-numeric first line is taken as a header;
/// blank lines are skipped.
pub fn parse_csv<R: BufRead>(input: R) -> Result<Dataset> {
    let mut values = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Data(format!("line {lineno}: {e}")))?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => values.push(v),
            Ok(v) => {
                return Err(Error::Data(format!(
                    "line {lineno}: value {v} is not strictly positive"
                )))
            }
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(Error::Data(format!("line {lineno}: '{field}' is not a number")))
            }
        }
    }
    Dataset::new(values)
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(std::io::BufReader::new(f))
}

/// Writes a single `value` column with round-trip float formatting.
pub fn write_sample_csv<W: Write>(mut out: W, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "value")?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()
}
