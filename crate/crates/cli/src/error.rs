use std::path::PathBuf;

use thiserror::Error;

/// Exit code for a manifest or argument that fails validation.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code when a run trips a hard invariant.
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManifestError {
    #[error("manifest syntax: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] lrfpp::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
    #[error("manifest has no {0} entries")]
    NothingToRun(&'static str),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) | CliError::NothingToRun(_) | CliError::Pool(_) => EXIT_VALIDATION,
            CliError::Core(lrfpp::Error::Invariant(_)) | CliError::ChecksFailed(_) => EXIT_INVARIANT,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => EXIT_IO,
        }
    }
}
