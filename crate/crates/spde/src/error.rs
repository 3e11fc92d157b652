use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum SpdeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A simulated path produced a NaN or infinity; the path is unusable.
    #[error("non-finite state at step {step}: {detail}")]
    NonFiniteState { step: usize, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed binary dump: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, SpdeError>;

impl SpdeError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SpdeError::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SpdeError::Io {
            path: path.into(),
            source,
        }
    }
}
