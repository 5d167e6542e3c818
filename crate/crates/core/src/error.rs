use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("CSV parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no records")]
    EmptyTable,

    #[error("not found: {0}")]
    NotFound(String),

    #[error("{0}")]
    Usage(String),

    #[error("column has no rich-type candidates")]
    EmptyProfile,

    /// Provider unreachable, timed out, or answered with a non-2xx status.
    #[error("provider transport error: {0}")]
    Transport(String),

    /// Provider answered, but the payload does not follow the wire format.
    #[error("provider protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport(_))
    }

    /// Errors caused by the caller's input rather than by the environment.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_) | Error::EmptyTable | Error::EmptyProfile | Error::Parse { .. })
    }

    pub fn is_provider(&self) -> bool {
        matches!(self, Error::Transport(_) | Error::Protocol(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
