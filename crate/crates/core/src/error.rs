use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Retryable network or provider-side failure.
    #[error("transport error: {0}")]
    Transport(String),

    /// Non-retryable provider failure (bad credentials, malformed request, ...).
    #[error("provider error: {0}")]
    Provider(String),

    #[error("cache miss in cache-only mode for key {key}")]
    CacheMiss { key: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path} line {line}: {message}")]
    Schema {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Transport(_))
    }
}

/// Rejection produced by an output parser. Parsers are total: every input text
/// yields either a value or one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ParseError(pub String);

impl ParseError {
    pub fn new(msg: impl Into<String>) -> Self {
        ParseError(msg.into())
    }
}
