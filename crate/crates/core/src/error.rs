use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by code construction, detection and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial {poly:#b} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("field degree {0} outside the supported range 2..=12")]
    FieldDegree(u32),
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("nonpositive noise variance at index {0}")]
    NonPositiveVariance(usize),
    #[error("channel matrix is singular")]
    SingularChannel,
    #[error("lattice of {size} points exceeds the exhaustive-search bound of {bound}")]
    LatticeTooLarge { size: f64, bound: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed csv {path}: row {row}, column {column}: {reason}")]
    Csv {
        path: PathBuf,
        row: usize,
        column: String,
        reason: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
