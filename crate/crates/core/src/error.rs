use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value could not be parsed.
    #[error("line {line}: cannot parse `{key}`: {message}")]
    Parse {
        key: String,
        line: usize,
        message: String,
    },

    /// One or more invariants were violated; every violation is listed.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or became unstable.
    #[error("numeric error: {message} (achieved {achieved:e})")]
    Numeric { message: String, achieved: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn numeric(message: impl Into<String>, achieved: f64) -> Self {
        Error::Numeric {
            message: message.into(),
            achieved,
        }
    }

    /// Process exit status for this error: 2 for numeric failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric { .. } => 2,
            _ => 1,
        }
    }
}
