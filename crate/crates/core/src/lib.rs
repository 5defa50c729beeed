//! Scoring engine for hierarchical readiness self-assessments.
//!
//! Scores on a bounded integer scale are entered for the leaf issues of a
//! taxonomy (domain → class → control → issue, any depth) and rolled up by
//! arithmetic means. The engine is generic over [`Scalar`]; the aliases at
//! the crate root fix it to `f64`, and the `Exact*` aliases to [`Rational`].

pub mod builtin;
pub mod error;
pub mod reporting;
pub mod scalar;
pub mod scale;
pub mod scoring;
pub mod taxonomy;

pub use builtin::{builtin_iso27001, ISO27001_ID};
pub use error::{ScoringError, TaxonomyError};
pub use reporting::{
    advise, export_result, histogram_series, summarize, Advice, ExportFormat, HistogramLevel,
    HistogramSeries, Summary,
};
pub use scalar::{fmt2, round2, Rational, Scalar};
pub use scale::Scale;
pub use scoring::{aggregate_node, check_sheet, evaluate, evaluate_at, Mode, ResultKind, ScoreSheet};
pub use taxonomy::{
    parse_taxonomy, validate_taxonomy, NodeKind, Severity, Taxonomy, TaxonomyNode, ValidationReport,
};

pub type NodeResult = scoring::NodeResult<f64>;
pub type AssessmentResult = scoring::AssessmentResult<f64>;
pub type ExactNodeResult = scoring::NodeResult<Rational>;
pub type ExactAssessmentResult = scoring::AssessmentResult<Rational>;

pub fn priority_of(achievement: f64, scale: &Scale) -> Result<f64, ScoringError> {
    scoring::priority_of(achievement, scale)
}

pub fn percentage_of(achievement: f64, scale: &Scale) -> Result<f64, ScoringError> {
    scoring::percentage_of(achievement, scale)
}

pub fn predicate_of(achievement: f64, scale: &Scale) -> Result<&str, ScoringError> {
    scoring::predicate_of(achievement, scale)
}
