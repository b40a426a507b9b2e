use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("degenerate design matrix (condition number {condition:e})")]
    DegenerateDesign { condition: f64 },

    #[error("estimate out of range: {0}")]
    OutOfRange(String),

    #[error("objective is not finite at the initial point")]
    NonFiniteObjective,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::DegenerateDesign { .. } => "degenerate-design",
            Error::OutOfRange(_) => "out-of-range",
            Error::NonFiniteObjective => "non-finite-objective",
            Error::Empty(_) => "empty-input",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
