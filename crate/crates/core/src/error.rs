use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::runner::ConfigError;

/// Which end of the truncated momentum basis a truncation breach happened on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edge::Lower => f.write_str("lower"),
            Edge::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: norm deviates from 1 by {deviation:e}")]
    InvalidState { deviation: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "truncation overflow at the {edge} edge (m = {index}): occupation {occupation:e} \
         exceeds {threshold:e}; widen the basis window"
    )]
    TruncationOverflow {
        edge: Edge,
        index: i64,
        occupation: f64,
        threshold: f64,
    },

    #[error("no localization: fitted log-occupation slope {slope} is not negative")]
    NoLocalization { slope: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
