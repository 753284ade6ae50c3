use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (e.g. `y <= 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data is unusable (nonpositive observation, empty sample, zero variance).
    #[error("data error: {0}")]
    Data(String),

    /// Invalid parameters, descriptors, grids or CLI options.
    #[error("configuration error: {0}")]
    Config(String),

    /// A full conditional has no proper distribution.
    #[error("degenerate conditional: {0}")]
    DegenerateConditional(String),

    /// The slice sampler needed more components than the truncation guard allows.
    #[error("truncation guard exceeded: coverage needs more than {limit} components")]
    Truncation { limit: usize },

    /// Any other numerical failure.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 1 data, 2 configuration, 3 numerical/truncation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Data(_) | Error::Io { .. } => 1,
            Error::Config(_) => 2,
            Error::DegenerateConditional(_) | Error::Truncation { .. } | Error::Numerical(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
