use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix product collapsed to zero (a zero row pattern annihilated it)")]
    ZeroProduct,
    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),
    #[error("matrix is not primitive")]
    NotPrimitive,
    #[error("support enumeration of {requested} products exceeds budget {budget}")]
    SupportTooLarge { requested: f64, budget: u64 },
    #[error("zero matrix")]
    ZeroMatrix,
    #[error("matrix has a non-positive entry")]
    NonPositive,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("population {0} exceeds the configured cap")]
    PopulationOverflow(u64),
    #[error("anchor {y} has zero mass below it: P[|Y| <= y] = 0")]
    ZeroAnchor { y: f64 },
    #[error("mean step {0} is not positive")]
    NonpositiveDrift(f64),
    #[error("rho = {0} is not below 1 (critical or supercritical frog branching)")]
    CriticalRho(f64),
    #[error("E[ln rho_0] = {0} is not positive")]
    WrongRegime(f64),
    #[error("anchors disagree: {0}")]
    AnchorDisagreement(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
