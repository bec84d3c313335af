use std::path::PathBuf;

/// Errors raised by the simulator, the estimate lab and the I/O layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("blowup at step {step}: {reason}")]
    Blowup { step: u64, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error("version skew: found {found:?}, expected {expected:?}")]
    VersionSkew { found: String, expected: String },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolation(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
