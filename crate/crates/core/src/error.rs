use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor or matrix shapes do not conform.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A caller violated an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A numerical routine could not produce a finite, well-conditioned result.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Inconsistent scenario, architecture or training configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A dataset or checkpoint file is malformed.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
