use std::path::PathBuf;

use thiserror::Error;

/// Failure classes of the command-line tool, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Solver(#[from] nlwave_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn config(issue: impl Into<String>) -> Self {
        CliError::Config(vec![issue.into()])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            // invalid scenarios reach the core as config errors too
            CliError::Solver(nlwave_core::Error::InvalidConfig(_)) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Machine-parsable tag printed in front of the message.
    pub fn prefix(&self) -> &'static str {
        match self.exit_code() {
            1 => "error[failed]",
            2 => "error[config]",
            3 => "error[solver]",
            _ => "error[io]",
        }
    }
}
