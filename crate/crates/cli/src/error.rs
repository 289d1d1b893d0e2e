use std::fmt;
use std::path::Path;

use qcorr::io::FormatError;
use qcorr::{FitError, GarchError, IngestError, QcfError, SeriesError};

/// Exit code for invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for failures while running a valid configuration.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: "config",
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            kind: "io",
            message: format!("{}: {err}", path.display()),
            code: EXIT_RUNTIME,
        }
    }

    fn runtime(kind: &'static str, err: impl fmt::Display) -> Self {
        Self {
            kind,
            message: err.to_string(),
            code: EXIT_RUNTIME,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<QcfError> for CliError {
    fn from(e: QcfError) -> Self {
        Self::runtime("qcf", e)
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        Self::runtime("fit", e)
    }
}

impl From<GarchError> for CliError {
    fn from(e: GarchError) -> Self {
        Self::runtime("model", e)
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        Self::runtime("ingest", e)
    }
}

impl From<SeriesError> for CliError {
    fn from(e: SeriesError) -> Self {
        Self::runtime("series", e)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        Self::runtime("format", e)
    }
}
