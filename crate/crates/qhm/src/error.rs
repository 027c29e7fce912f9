use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(qhm_core::Error),
    #[error("numerical failure: {0}")]
    Numerical(qhm_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Json { .. } => 2,
            CliError::Precondition(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<qhm_core::Error> for CliError {
    fn from(e: qhm_core::Error) -> Self {
        use qhm_core::Error as E;
        match e {
            E::EigenFailure { .. } | E::SingularBase { .. } | E::UnresolvedCrossing { .. } => CliError::Numerical(e),
            _ => CliError::Precondition(e),
        }
    }
}
