use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of the arguments do not agree with the model.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Usage(String),

    /// Exhaustive enumeration would visit more hidden codes than allowed.
    #[error("exact enumeration needs {codes} hidden codes, above the cap of {cap}")]
    Capacity { codes: u128, cap: u128 },

    /// A gradient or parameter became NaN or infinite.
    #[error("non-finite value in parameter block `{block}`")]
    NonFinite { block: &'static str },

    /// A column of a dataset is constant and cannot be standardized.
    #[error("dimension {dim} has zero variance")]
    ZeroVariance { dim: usize },

    /// Malformed text input.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Checkpoint header does not start with the expected magic word.
    #[error("bad checkpoint magic: expected `GMRBM1`, found `{0}`")]
    Magic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
