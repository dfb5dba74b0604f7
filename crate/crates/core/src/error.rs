use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frame configuration: {0}")]
    InvalidFrame(String),

    /// Delay or Doppler outside `0 <= tau < T`, `|nu| < delta_f`.
    #[error("inadmissible target: {0}")]
    Inadmissible(String),

    #[error("unknown constellation `{0}`")]
    UnknownConstellation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("grid is in the {got} domain, expected {expected}")]
    DomainMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("undersampled estimation grid: {0}")]
    Undersampled(String),

    #[error("estimation grid is empty")]
    EmptyGrid,

    #[error("matched-filter energy vanished at every grid point")]
    DegenerateStatistic,

    #[error("SNR must be positive, got {0}")]
    NonPositiveSnr(f64),

    #[error("Fisher information matrix is singular")]
    SingularFisher,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
