use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A non-finite input or parameter reached a numeric routine.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("shape error: {0}")]
    Shape(String),

    /// Labels or class structure do not satisfy an operation's precondition.
    #[error("data error: {0}")]
    Data(String),

    #[error("ingestion error in {}: {message} (offset {offset})", path.display())]
    Ingestion {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("run failed for {context}: {source}")]
    Run {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps an error with the run it came from, e.g. `slope=0.1 seed=3`.
    pub fn in_run(self, context: impl Into<String>) -> Self {
        Error::Run {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
