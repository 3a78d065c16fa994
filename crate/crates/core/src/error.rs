use thiserror::Error;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HmgaError {
    #[error("coordinate {index}: value {value} is outside the support of its marginal")]
    Domain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("degenerate problem: origin on or beyond failure surface (g0 = {g0}, eta = {eta})")]
    DegenerateProblem { g0: f64, eta: f64 },

    #[error("decoded direction has zero norm")]
    ZeroDirection,

    #[error("penalty calibration failed: {0}")]
    Calibration(String),

    #[error("no failure surface found")]
    NoFailureSurface,

    /// No genotype of high failure content appeared within the generation cap.
    #[error(
        "failure surface not found after {generations} generations \
         (best partial: beta = {best_beta}, g = {best_g}, {evaluations} evaluations)"
    )]
    SurfaceNotFound {
        best_beta: f64,
        best_g: f64,
        generations: usize,
        evaluations: usize,
    },

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl HmgaError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HmgaError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, HmgaError>;
