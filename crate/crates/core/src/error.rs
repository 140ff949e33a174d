use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QzzbError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("no sign change of the bound difference on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("Fock truncation too small: tail mass {tail:.3e} at cutoff {cutoff}, need cutoff >= {required}")]
    Truncation {
        tail: f64,
        cutoff: usize,
        required: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl QzzbError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        QzzbError::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QzzbError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = QzzbError> = std::result::Result<T, E>;
