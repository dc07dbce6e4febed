use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI command, classified for the exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed files, inconsistent shapes,
    /// invalid flag values.
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical solver failed on valid input.
    #[error("solver failure{}: {source}", step.map(|s| format!(" in step '{s}'")).unwrap_or_default())]
    Solver {
        step: Option<&'static str>,
        #[source]
        source: tunefree_core::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Solver { .. } => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<tunefree_core::Error> for CliError {
    fn from(e: tunefree_core::Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver { step: e.step(), source: e }
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
