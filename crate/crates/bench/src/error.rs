use std::path::Path;

use ppa_core::lasso::LassoError;
use ppa_core::registry::RegistryError;
use ppa_core::solver::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl BenchError {
    /// 2 for usage and validation errors, 3 for divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) | BenchError::Validation(_) => 2,
            BenchError::Diverged(_) => 3,
            BenchError::Io { .. } | BenchError::Failed(_) => 1,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<SolveError> for BenchError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Parameters(v) => BenchError::Validation(v.to_string()),
            SolveError::Criteria(_) | SolveError::Config(_) => BenchError::Validation(e.to_string()),
            SolveError::Diverged { .. } => BenchError::Diverged(e.to_string()),
            other => BenchError::Failed(other.to_string()),
        }
    }
}

impl From<RegistryError> for BenchError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Invalid(inner) => inner.into(),
            other => BenchError::Usage(other.to_string()),
        }
    }
}

impl From<LassoError> for BenchError {
    fn from(e: LassoError) -> Self {
        match e {
            LassoError::Io { path, source } => BenchError::Io { path, source },
            LassoError::Parameters(v) => BenchError::Validation(v.to_string()),
            LassoError::Config(_) => BenchError::Validation(e.to_string()),
            other => BenchError::Failed(other.to_string()),
        }
    }
}
