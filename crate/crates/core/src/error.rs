use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid binary measurement: {0}")]
    InvalidMeasurement(String),

    #[error("register index {index} out of range for {count} registers")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("measurement operators do not form a basis of the operator space")]
    SingularFrame,

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("dimension cap exceeded: {0}")]
    CapExceeded(String),

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invariant violation at `{path}`: {message}")]
    Invariant { path: String, message: String },

    #[error("solver did not converge: {message} (final gap {gap:.3e})")]
    Solver { message: String, gap: f64 },
}

impl Error {
    pub(crate) fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
