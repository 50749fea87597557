use std::path::PathBuf;

use serde_json::{json, Map, Value};
use signal_analysis::{AnalysisError, ErrorKind};
use thiserror::Error;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        source: AnalysisError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0} requires --{1}")]
    MissingArgument(&'static str, &'static str),
    #[error("usage: {0}")]
    Usage(String),
    #[error("no data: {0}")]
    NoData(String),
    #[error("{invalid} of {total} rows failed validation")]
    Validation { invalid: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(path: impl Into<PathBuf>) -> impl FnOnce(AnalysisError) -> Self {
        let path = path.into();
        move |source| CliError::InFile { path, source }
    }

    fn analysis(&self) -> Option<&AnalysisError> {
        match self {
            CliError::Analysis(e) | CliError::InFile { source: e, .. } => Some(e),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => match self.analysis().map(AnalysisError::kind) {
                Some(ErrorKind::Domain) => EXIT_DOMAIN,
                _ => EXIT_INPUT,
            },
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Analysis(e) | CliError::InFile { source: e, .. } => e.code(),
            CliError::Io { .. } => "Io",
            CliError::MissingArgument(..) => "MissingArgument",
            CliError::Usage(_) => "UsageError",
            CliError::NoData(_) => "NoData",
            CliError::Validation { .. } => "ValidationFailed",
        }
    }

    /// One-line JSON description of the failure for stderr.
    pub fn record(&self, subcommand: &str) -> Value {
        let kind = match self.exit_code() {
            EXIT_DOMAIN => "domain",
            EXIT_IO => "io",
            _ => "input",
        };
        let mut m = Map::new();
        m.insert("status".into(), json!("error"));
        m.insert("subcommand".into(), json!(subcommand));
        m.insert("exit_code".into(), json!(self.exit_code()));
        m.insert("kind".into(), json!(kind));
        m.insert("code".into(), json!(self.code()));
        m.insert("message".into(), json!(self.to_string()));
        if let Some(row) = self.analysis().and_then(AnalysisError::row) {
            m.insert("row".into(), json!(row));
        }
        match self {
            CliError::InFile { path, .. } | CliError::Io { path, .. } => {
                m.insert("path".into(), json!(path.display().to_string()));
            }
            _ => {}
        }
        Value::Object(m)
    }
}
