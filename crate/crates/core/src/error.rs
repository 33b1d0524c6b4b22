use thiserror::Error;

/// Error type shared by all modules.
///
/// `Contract` marks violated preconditions (caller bugs), `Numerical` marks
/// runtime checks that failed despite valid inputs (e.g. a Cheeger guarantee
/// missed by the eigensolver, or a certification gap in a decomposition).
/// The distinction matters to the CLI, which maps them to different exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at {path}:{location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
