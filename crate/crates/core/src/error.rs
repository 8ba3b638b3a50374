use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The level set has no zero crossing left (uniformly signed field).
    #[error("contour vanished: level set is uniformly {}", if *.positive { "positive" } else { "non-positive" })]
    ContourVanished { positive: bool },

    #[error(
        "stability bound violated: sqrt(max b) * substep / spacing = {value:.4} exceeds {limit}"
    )]
    Stability { value: f64, limit: f64 },

    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
