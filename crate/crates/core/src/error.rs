use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: invalid UTF-8 at byte offset {offset}", path.display())]
    InvalidUtf8 { path: PathBuf, offset: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// A vocabulary or model file failed validation. `line` is 1-based.
    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    /// Structural problem with a model or vocabulary file that is not tied to one line.
    #[error("{0}")]
    Format(String),

    #[error("word of {len} characters exceeds the maximum of {max}")]
    OverLength { len: usize, max: usize },

    #[error("id {id} at position {position} is out of range for a vocabulary of {size} tokens")]
    IdOutOfRange { position: usize, id: u32, size: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
