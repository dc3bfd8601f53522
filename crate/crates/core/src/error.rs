use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("search collapsed at frame {frame}: no active hypotheses")]
    SearchCollapsed { frame: usize },

    #[error("no complete hypothesis reached the final frame ({frames} frames)")]
    NoCompleteHypothesis { frames: usize },

    #[error("enumeration guard: {count} sequences exceeds the limit of {limit}")]
    EnumerationGuard { count: u128, limit: u128 },

    #[error("run failed: {failed} of {total} utterances could not be decoded")]
    FailureBudget { failed: usize, total: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for the command-line front end: 2 for data problems,
    /// 3 for search failures, 1 for configuration/usage problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownStrategy { .. } => 1,
            Error::SearchCollapsed { .. } | Error::NoCompleteHypothesis { .. } => 3,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::EnumerationGuard { .. }
            | Error::FailureBudget { .. }
            | Error::Io { .. } => 2,
        }
    }
}
