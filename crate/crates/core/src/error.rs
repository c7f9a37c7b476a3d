use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed input text, with a `file:line` style location.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    /// A domain invariant was violated; `field` names the offending quantity.
    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("truncated frame: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("unknown {kind} `{key}`")]
    Unknown { kind: &'static str, key: String },

    #[error("duplicate {0}")]
    Duplicate(String),

    #[error("missing {0}")]
    Missing(String),

    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
