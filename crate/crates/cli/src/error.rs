use std::path::PathBuf;

use cpseg_core::Error as CoreError;
use serde_json::json;

/// Process exit status for each error class.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Parse { .. } | CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Parse { .. } | CliError::Data(_) | CliError::Io { .. } => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    /// The machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Parse { path, line, .. } = self {
            body["path"] = json!(path);
            body["line"] = json!(line);
        }
        json!({ "error": body })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::TooShort(_) | CoreError::InvalidValue { .. } => CliError::Data(message),
            CoreError::Numerical(_) | CoreError::SegmentRange { .. } => CliError::Numerical(message),
            _ => CliError::Config(message),
        }
    }
}
