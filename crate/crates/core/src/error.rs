//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension {dim} exceeds the limit of {limit} for {context}")]
    DimensionTooLarge {
        context: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("effective sampling region is empty: {0}")]
    EmptyDomain(String),

    #[error("finite-difference probe left the domain at {point:?} (step floor reached)")]
    ProbeLeftDomain { point: Vec<f64> },

    #[error(
        "inner maximizer did not converge after {iterations} iterations (residual {residual:e})"
    )]
    SolverNonConvergence { iterations: usize, residual: f64 },

    #[error(
        "inversion did not converge after {iterations} iterations (best residual {residual:e})"
    )]
    InversionNonConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("inversion iterate could not be kept inside the domain near {point:?}")]
    DomainExit { point: Vec<f64> },

    #[error("probability vector {0:?} is outside the open simplex")]
    OutsideSimplex(Vec<f64>),

    #[error("objective gradient is unavailable")]
    GradientUnavailable,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("unknown {what} `{found}`; valid values: {}", valid.join(", "))]
    UnknownKind {
        what: &'static str,
        found: String,
        valid: Vec<&'static str>,
    },

    #[error("unsupported schema version {found} (this build reads major version {supported})")]
    UnsupportedSchema { found: String, supported: u64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
