use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use isol_core::ScoringError;
use isol_store::StoreError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Every `code` an API error body can carry.
pub const ERROR_CODES: &[&str] = &[
    "InvalidInput",
    "OutOfRangeScore",
    "UnknownLeafId",
    "AuthFailure",
    "NotFound",
    "DuplicateUsername",
    "AlreadyFinalized",
    "IncompleteAssessment",
    "EmptyNode",
    "TaxonomyVersionMismatch",
    "InvalidTaxonomy",
    "StoreCorrupt",
    "StoreIo",
    "Internal",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status: status.as_u16(),
            code: code.to_string(),
            message: message.into(),
            details: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidInput", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "AuthFailure", "missing or invalid session token")
    }

    pub fn not_found(kind: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", format!("{kind} `{id}` not found"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }

    fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }
}

/// HTTP status for a module error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "InvalidInput" | "OutOfRangeScore" | "UnknownLeafId" | "MalformedDocument" => StatusCode::BAD_REQUEST,
        "AuthFailure" => StatusCode::UNAUTHORIZED,
        "NotFound" => StatusCode::NOT_FOUND,
        "DuplicateUsername" | "AlreadyFinalized" | "IncompleteAssessment" | "EmptyNode"
        | "TaxonomyVersionMismatch" => StatusCode::CONFLICT,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<ScoringError> for ApiError {
    fn from(e: ScoringError) -> Self {
        let details = match &e {
            ScoringError::IncompleteAssessment { missing } => Some(json!({ "missing": missing })),
            ScoringError::UnknownLeafId { ids } => Some(json!({ "ids": ids })),
            ScoringError::EmptyNode { node_id } => Some(json!({ "node_id": node_id })),
            ScoringError::OutOfRangeScore {
                leaf_id,
                value,
                min,
                max,
            } => Some(json!({ "leaf_id": leaf_id, "value": value, "min": min, "max": max })),
            ScoringError::InvalidTaxonomy { errors, .. } => Some(json!({ "errors": errors })),
        };
        let err = ApiError::new(status_for(e.code()), e.code(), e.to_string());
        match details {
            Some(d) => err.with_details(d),
            None => err,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Scoring(s) => s.into(),
            StoreError::NotFound { kind, ref id } => {
                ApiError::not_found(kind, id).with_details(json!({ "kind": kind, "id": id }))
            }
            other => ApiError::new(status_for(other.code()), other.code(), other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_code_is_documented() {
        let samples: Vec<ApiError> = vec![
            StoreError::InvalidInput("x".into()).into(),
            StoreError::DuplicateUsername("x".into()).into(),
            StoreError::AuthFailure.into(),
            StoreError::NotFound { kind: "experiment", id: "e1".into() }.into(),
            StoreError::AlreadyFinalized("e1".into()).into(),
            StoreError::VersionMismatch { taxonomy_id: "t".into(), recorded: "1".into(), current: "2".into() }.into(),
            StoreError::Corrupt { line: 1, message: "x".into() }.into(),
            StoreError::Io(std::io::Error::other("x")).into(),
            ScoringError::IncompleteAssessment { missing: vec!["q".into()] }.into(),
            ScoringError::EmptyNode { node_id: "n".into() }.into(),
            ScoringError::OutOfRangeScore { leaf_id: None, value: 9.0, min: 0, max: 4 }.into(),
            ScoringError::UnknownLeafId { ids: vec![] }.into(),
            ScoringError::InvalidTaxonomy { taxonomy_id: "t".into(), errors: vec![] }.into(),
        ];
        for e in &samples {
            assert!(ERROR_CODES.contains(&e.code.as_str()), "{}", e.code);
            let client_caused = !matches!(e.code.as_str(), "StoreCorrupt" | "StoreIo" | "InvalidTaxonomy" | "Internal");
            assert_eq!(client_caused, e.status < 500, "{}", e.code);
        }
    }

    #[test]
    fn state_conflicts_are_409() {
        let e: ApiError = ScoringError::IncompleteAssessment { missing: vec!["a".into()] }.into();
        assert_eq!(e.status, 409);
        assert_eq!(e.details, Some(json!({ "missing": ["a"] })));
        let e: ApiError = StoreError::AlreadyFinalized("e".into()).into();
        assert_eq!(e.status, 409);
    }
}
