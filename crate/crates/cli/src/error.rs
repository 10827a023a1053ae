use std::path::PathBuf;

use thiserror::Error;

/// One problem found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// Dotted path of the offending field, e.g. `lattice.interaction`.
    pub path: String,
    pub message: String,
    /// Set when the problem is a Hilbert-space dimension over the cap.
    pub capacity: bool,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("configuration is not valid TOML: {0}")]
    Parse(String),
    #[error("configuration has {} problem(s):\n{}", .0.len(), render(.0))]
    Invalid(Vec<Issue>),
    #[error(transparent)]
    Library(#[from] fockchaos::Error),
    #[error("cannot start worker threads: {0}")]
    Threads(String),
    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),
}

fn render(issues: &[Issue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    /// Process exit status: 2 configuration, 3 capacity, 4 numerical
    /// failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invalid(issues) if issues.iter().any(|i| i.capacity) => 3,
            CliError::Invalid(_) => 2,
            CliError::Library(e) if e.is_capacity() => 3,
            CliError::Library(fockchaos::Error::InvalidParameter(_)) => 2,
            CliError::Library(_) => 4,
            CliError::Read { .. } => 2,
            CliError::Write { .. } | CliError::Threads(_) | CliError::Csv(_) => 1,
        }
    }
}
