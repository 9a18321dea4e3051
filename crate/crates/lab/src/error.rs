use std::path::PathBuf;

use epstein_core::Error as CoreError;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown suite `{0}` (expected schwarzian, epstein, duality, conformal-change, weingarten, foliation or all)")]
    UnknownSuite(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: line {line}: {why}", path.display())]
    Format { path: PathBuf, line: usize, why: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }

    /// Process exit code; part of the command-line contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_)
            | LabError::UnknownSuite(_)
            | LabError::Io { .. }
            | LabError::Json { .. }
            | LabError::Csv { .. }
            | LabError::Format { .. } => 2,
            LabError::Core(CoreError::NotElliptic) => 3,
            LabError::Core(CoreError::NewtonDiverged { .. } | CoreError::LinearSolveFailed { .. }) => 4,
            LabError::Core(CoreError::PositivityLost(_)) => 5,
            LabError::Core(_) => 1,
        }
    }
}
