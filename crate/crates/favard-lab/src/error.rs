//! Error type shared by the library and the CLI.

use std::io;

/// Failure modes surfaced by library operations.
///
/// The CLI maps each variant to a stable process exit code, so the
/// classification here is part of the public contract: bad argument
/// values are `Validation`, requests that would blow the capacity
/// guards are `Capacity`, and everything environmental is `Io`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument failed a documented precondition.
    #[error("invalid argument: {0}")]
    Validation(String),

    /// The request exceeds a hard capacity guard (memory or pair-count).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Reading a config or writing a report failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    /// A config file or report payload did not parse.
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code used by the CLI: 2 for validation failures,
    /// 3 for capacity and runtime failures.  Usage errors (exit 1) are
    /// produced by the argument parser before an `Error` ever exists.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 2,
            Error::Capacity(_) | Error::Io { .. } | Error::Parse(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
