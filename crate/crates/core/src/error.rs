use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Fock level {level} out of range for cutoff {cutoff}")]
    LevelOutOfRange { level: usize, cutoff: usize },

    /// Probability reached the top of the truncated space; results computed
    /// past this point are not trustworthy.
    #[error(
        "truncation-unsafe: {leakage:e} of the probability sits in the top levels of mode {mode} after step {step}"
    )]
    TruncationUnsafe { step: usize, mode: usize, leakage: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_truncation_unsafe(&self) -> bool {
        matches!(self, Error::TruncationUnsafe { .. })
    }
}
