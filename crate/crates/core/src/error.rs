use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, solver or scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed JSON; position is 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A function argument outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Non-finite values appeared in the field.
    #[error("numerical blow-up detected at step {step}")]
    BlowUp { step: u64 },

    #[error("degenerate field: {0}")]
    Degenerate(String),

    /// Corrupt or truncated snapshot file.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dimension(expected: usize, actual: usize) -> Self {
        Error::Dimension(format!("expected {expected} samples, got {actual}"))
    }
}
