use std::path::PathBuf;

use thiserror::Error;

use crate::balance_sheet::Violation;

pub type Result<T, E = CalmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CalmError {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Risk parameters are missing or inconsistent for the given position.
    #[error("configuration error: {0}")]
    Config(String),

    /// Shape mismatch between inputs (duplicate ids, missing buckets, dates).
    #[error("structural error: {0}")]
    Structural(String),

    #[error("snapshot failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// Parse failure; every problem found in the file is listed.
    #[error("{}: {}", .path.display(), .problems.join("; "))]
    Parse { path: PathBuf, problems: Vec<String> },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CalmError {
    pub(crate) fn parse(path: impl Into<PathBuf>, problems: Vec<String>) -> Self {
        CalmError::Parse { path: path.into(), problems }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CalmError::Io { path: path.into(), source }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
