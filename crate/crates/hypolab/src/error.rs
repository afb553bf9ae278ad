//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite {what} at point {point:?}")]
    NonFinite { what: String, point: Vec<f64> },

    #[error("integral shows a divergent tail trend: {0}")]
    DivergentIntegral(String),

    #[error("tail mass cannot be certified within the truncation budget: {0}")]
    TailNotCertifiable(String),

    #[error("singular radial profile: phi'({r}) = {value}")]
    SingularProfile { r: f64, value: f64 },

    #[error("observable contract violated: empirical {empirical} exceeds declared bound {declared}")]
    ObservableContract { empirical: f64, declared: f64 },

    #[error("trajectory blow-up at step {step} of path {path}: state {state:?}")]
    BlowUp {
        step: usize,
        path: usize,
        state: Vec<f64>,
    },

    #[error("grid rejected: {0}")]
    GridRejected(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("eigenvalue solve failed: {0}")]
    EigenFailed(String),

    #[error("fit inconclusive: {0}")]
    InconclusiveFit(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("report kind mismatch: {a} vs {b}")]
    KindMismatch { a: String, b: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
