use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed a value outside an operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{0}")]
    Config(#[from] ConfigError),

    /// Eigensolver non-convergence, excessive norm drift and similar.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Too few samples or levels for a statistic to be meaningful.
    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Configuration failures, kept apart so messages can name the key at fault.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    Constraint { key: String, reason: String },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn constraint(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config(ConfigError::Constraint {
            key: key.into(),
            reason: reason.into(),
        })
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Argument(_) | Error::Config(_) => 1,
            Error::Numeric(_) | Error::Statistics(_) => 2,
            Error::Io(_) => 3,
        }
    }
}
