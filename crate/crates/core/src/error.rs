use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinslerError {
    #[error("derivative of total order {0} requested; at most 4 is supported")]
    UnsupportedOrder(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("finite-difference step {step:e} is ill-conditioned for coordinate scale {scale:e}")]
    IllConditionedStep { step: f64, scale: f64 },
    #[error("Levi matrix is ill-conditioned (condition number {0:e})")]
    IllConditionedMetric(f64),
    #[error("singular Hermitian tensor")]
    Singular,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown metric '{name}'; available: {zoo}")]
    UnknownMetric { name: String, zoo: String },
    #[error("unknown map '{0}'")]
    UnknownMap(String),
}

pub type Result<T> = std::result::Result<T, FinslerError>;
