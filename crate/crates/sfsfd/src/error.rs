//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by design construction, transforms, and the benchmark
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("design must contain at least one point")]
    EmptyDesign,

    #[error("design dimension must be at least 1")]
    EmptyDimension,

    #[error("coordinate ({row}, {col}) = {value} lies outside [0, 1]")]
    CoordinateOutOfRange {
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("design row {row} has {got} coordinates, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("invalid probability masses: {0}")]
    InvalidMasses(String),

    #[error("invalid sqrt-mass amplitudes: {0}")]
    InvalidAmplitudes(String),

    #[error("invalid Fourier coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid Euler angles: {0}")]
    InvalidAngles(String),

    #[error("invalid optimization spec: {0}")]
    InvalidSpec(String),

    #[error("optimizer made no progress: {0}")]
    OptimizerFailed(String),

    #[error("dimension {requested} exceeds the direction-number table ({max} dimensions supported)")]
    DimensionTooLarge { requested: usize, max: usize },

    #[error("direction-number table line {line}: {message}")]
    DirectionTable { line: usize, message: String },

    #[error("inconsistent variant flags for ({method}, d={d}, n={n}): {details}")]
    InconsistentFlags {
        method: String,
        d: usize,
        n: usize,
        details: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
