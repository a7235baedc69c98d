//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed content in a data file; `line` is 1-based.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    /// No token survived the vocabulary constraints — the corpus is too
    /// small for the requested `min_count` / `max_vocab`.
    #[error("empty vocabulary: no token met the frequency constraints")]
    EmptyVocabulary,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },

    #[error("language {0:?} is already present in the space")]
    LanguageCollision(String),

    #[error("language {0:?} is not present in the space")]
    UnknownLanguage(String),

    #[error("invalid language id {0:?}: must be nonempty, without whitespace or ':'")]
    InvalidLang(String),

    /// Training or evaluation produced NaN/inf.
    #[error("numerical failure: {0}")]
    NonFinite(String),

    /// No test query was found in the source-language slice.
    #[error("no evaluable queries: none of the test source words is in the space")]
    NoQueries,
}

pub type Result<T> = std::result::Result<T, Error>;

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
}
