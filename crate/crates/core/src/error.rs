use thiserror::Error;

/// Failures of the scoring engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("assessment incomplete: {} unscored issue(s): {}", missing.len(), missing.join(", "))]
    IncompleteAssessment { missing: Vec<String> },
    #[error("node `{node_id}` has no scored children to aggregate")]
    EmptyNode { node_id: String },
    #[error("{} value {value} outside scale {min}..={max}", leaf_id.as_deref().map(|id| format!("score for `{id}`:")).unwrap_or_else(|| "achievement".into()))]
    OutOfRangeScore {
        leaf_id: Option<String>,
        value: f64,
        min: i64,
        max: i64,
    },
    #[error("score sheet references unknown issue id(s): {}", ids.join(", "))]
    UnknownLeafId { ids: Vec<String> },
    #[error("taxonomy `{taxonomy_id}` failed validation: {}", errors.join("; "))]
    InvalidTaxonomy {
        taxonomy_id: String,
        errors: Vec<String>,
    },
}

impl ScoringError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            ScoringError::IncompleteAssessment { .. } => "IncompleteAssessment",
            ScoringError::EmptyNode { .. } => "EmptyNode",
            ScoringError::OutOfRangeScore { .. } => "OutOfRangeScore",
            ScoringError::UnknownLeafId { .. } => "UnknownLeafId",
            ScoringError::InvalidTaxonomy { .. } => "InvalidTaxonomy",
        }
    }
}

/// Failures while reading a taxonomy document.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonomyError {
    #[error("malformed taxonomy document at line {line}, column {column}: {message}")]
    MalformedDocument {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate node id `{id}`")]
    DuplicateId { id: String },
}

impl TaxonomyError {
    pub fn code(&self) -> &'static str {
        match self {
            TaxonomyError::MalformedDocument { .. } => "MalformedDocument",
            TaxonomyError::DuplicateId { .. } => "DuplicateId",
        }
    }
}
