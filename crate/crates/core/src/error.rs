use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A value is outside the domain of the formula or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input data (negative disutilities, ragged rows, bad partitions).
    #[error("validation error: {0}")]
    Validation(String),

    /// A number could not be parsed as an exact rational.
    #[error("cannot parse `{input}` as a rational number")]
    Parse { input: String },

    /// CSV parse failure, with a 1-based line number.
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },

    /// The exact solver would exceed its configured limits.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
