use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed value {cell:?}: {reason}")]
    MalformedValue { cell: String, reason: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("semantic error: {0}")]
    Semantic(String),

    #[error("unknown graph {name:?}; available graphs: {}", .available.join(", "))]
    UnknownGraph { name: String, available: Vec<String> },

    #[error("graph name {name:?} is already bound to {existing}")]
    NameCollision { name: String, existing: PathBuf },

    #[error("source file of graph {name:?} is missing: {path}")]
    StaleSource { name: String, path: PathBuf },

    #[error("graph cache at {path} is corrupt: {reason}")]
    CorruptCache { path: PathBuf, reason: String },

    #[error("import of {path} failed: {source}")]
    Import {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("class hierarchy has a cycle through {0}")]
    Cycle(String),

    #[error("execution error: {0}")]
    Execution(String),

    #[error(transparent)]
    Storage(#[from] rusqlite::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn semantic(message: impl Into<String>) -> Self {
        Error::Semantic(message.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MalformedValue { .. }
            | Error::Schema(_)
            | Error::Syntax { .. }
            | Error::Semantic(_)
            | Error::UnknownGraph { .. }
            | Error::NameCollision { .. }
            | Error::Cycle(_) => 2,
            Error::Row { .. }
            | Error::StaleSource { .. }
            | Error::Import { .. }
            | Error::Execution(_)
            | Error::Storage(_)
            | Error::Io(_) => 3,
            Error::CorruptCache { .. } => 4,
        }
    }
}
