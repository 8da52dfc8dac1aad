use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("name is empty after normalization: {0:?}")]
    EmptyName(String),

    #[error("corpus contains no profiles")]
    EmptyCorpus,

    #[error("duplicate profile id {0:?}")]
    DuplicateId(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid config key {key:?}: {message}")]
    Config { key: String, message: String },

    #[error("invalid synthetic corpus spec: {0}")]
    Spec(String),

    #[error("invalid romanization table line {line}: {message}")]
    Table { line: usize, message: String },

    #[error("index file: {0}")]
    IndexFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
