use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid knot {index}: {reason}")]
    InvalidKnot { index: usize, reason: String },

    #[error("level {u} is outside the inverse domain [{lo}, {hi}]")]
    Domain {
        u: Box<Scalar>,
        lo: Box<Scalar>,
        hi: Box<Scalar>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cuboid corners are not ordered on axis {axis}")]
    UnorderedCuboid { axis: usize },

    #[error("axis {index} out of range for dimension {dim}")]
    AxisOutOfRange { index: usize, dim: usize },

    #[error("margin {axis} is not a cdf: limits are {lo} and {hi}, expected 0 and 1")]
    NotCdf {
        axis: usize,
        lo: Box<Scalar>,
        hi: Box<Scalar>,
    },

    #[error("{0}")]
    InvalidFamily(String),

    #[error("coordinate {value} at axis {axis} is outside [0, 1]")]
    OutsideUnitCube { axis: usize, value: String },

    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: {reason}")]
    BadCell {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
