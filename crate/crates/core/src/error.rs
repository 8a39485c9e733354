use std::path::PathBuf;

use crate::conic::SolveStatus;

/// Errors raised by the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("conic solver stopped with status {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
