use thiserror::Error;

use crate::catalog::CatalogError;
use crate::federation::FederationError;
use crate::planner::PlanError;
use crate::provenance::ProvenanceError;
use crate::query::{ParseError, ValidationError};
use crate::registry::RegistryError;

/// Any failure of the mediator pipeline or its ingestion paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Federation(#[from] FederationError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 1 usage, 2 parse or validation, 3 anything
    /// else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Parse(_) | Error::Validation(_) | Error::Plan(PlanError::Validation(_)) => 2,
            _ => 3,
        }
    }

    /// True for failures caused by the query text or its names.
    pub fn is_query_error(&self) -> bool {
        self.exit_code() == 2
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Error::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub(crate) fn format(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Error::Format { path: path.display().to_string(), message: e.to_string() }
    }
}
