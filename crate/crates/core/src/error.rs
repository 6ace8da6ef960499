use thiserror::Error;

use crate::linalg::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The best iterate is returned alongside the report.
    #[error("conjugate gradients did not converge: {report}")]
    NonConvergence { x: Vec<f64>, report: SolveReport },

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("diagonal entry {row} is not strictly positive ({value:e})")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("invalid count {count}: {reason}")]
    InvalidCount { count: usize, reason: &'static str },

    #[error("invalid ratio bound {0} (must be finite and >= 1)")]
    InvalidRatio(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field kind mismatch: expected {expected}, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("mesh quality failure: {0}")]
    QualityFailure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh invariant violation: {0}")]
    InvariantViolation(String),

    #[error(
        "velocity is not the skew gradient of the supplied streamfunction (max deviation {0:e})"
    )]
    RepresentationMismatch(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
