use isol_core::ScoringError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("username `{0}` is already taken")]
    DuplicateUsername(String),
    #[error("invalid username or secret")]
    AuthFailure,
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("experiment `{0}` is finalized and can no longer change")]
    AlreadyFinalized(String),
    #[error("experiment was scored against {taxonomy_id} v{recorded}, but v{current} is loaded")]
    VersionMismatch {
        taxonomy_id: String,
        recorded: String,
        current: String,
    },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
    #[error("store file corrupt at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl StoreError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::InvalidInput(_) => "InvalidInput",
            StoreError::DuplicateUsername(_) => "DuplicateUsername",
            StoreError::AuthFailure => "AuthFailure",
            StoreError::NotFound { .. } => "NotFound",
            StoreError::AlreadyFinalized(_) => "AlreadyFinalized",
            StoreError::VersionMismatch { .. } => "TaxonomyVersionMismatch",
            StoreError::Scoring(e) => e.code(),
            StoreError::Corrupt { .. } => "StoreCorrupt",
            StoreError::Io(_) => "StoreIo",
        }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;
