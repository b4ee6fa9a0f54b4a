//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The exact connected-subgraph search ran past its node-expansion cap.
    /// Surfaced as a hard error so experiments never silently mix exact and
    /// heuristic results.
    #[error("search budget exceeded: {expansions} node expansions (cap {cap})")]
    BudgetExceeded { expansions: u64, cap: u64 },

    /// A pipeline stage failed; the stage name makes multi-step runs
    /// diagnosable from the message alone.
    #[error("stage '{stage}': {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(stage: &'static str, err: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(err),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
