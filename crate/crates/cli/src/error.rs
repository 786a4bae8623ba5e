use std::io;
use std::path::PathBuf;

use klfield::KlError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Library(#[from] KlError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: impl Into<io::Error>) -> Self {
        CliError::Io {
            path: path.into(),
            source: source.into(),
        }
    }

    /// 2 for anything the caller can fix, 3 when a solver gave up.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numeric() => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Library(e) if e.is_numeric() => "numeric",
            CliError::Library(_) => "invalid_parameter",
        }
    }

    /// The one-line JSON object written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Report {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error report is plain data")
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FLAGGED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub type Result<T> = std::result::Result<T, CliError>;
