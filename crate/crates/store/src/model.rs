use chrono::{DateTime, Utc};
use isol_core::{AssessmentResult, ScoreSheet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    pub username: String,
    /// Salted hash; never the secret itself.
    pub credential_hash: String,
    pub created_at: DateTime<Utc>,
}

/// One assessment attempt by one user against one taxonomy version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub id: String,
    pub user_id: String,
    pub taxonomy_id: String,
    pub taxonomy_version: String,
    /// 1-based, counted per (user, taxonomy) in start order.
    pub attempt_number: u32,
    pub started_at: DateTime<Utc>,
    #[serde(default)]
    pub finalized_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub sheet: ScoreSheet,
    #[serde(default)]
    pub result: Option<AssessmentResult>,
}

impl Experiment {
    pub fn is_finalized(&self) -> bool {
        self.finalized_at.is_some()
    }

    pub fn duration_seconds(&self) -> Option<i64> {
        self.finalized_at.map(|f| (f - self.started_at).num_seconds())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub experiment_id: String,
    pub attempt_number: u32,
    pub started_at: DateTime<Utc>,
    pub finalized_at: DateTime<Utc>,
    pub duration_seconds: i64,
    pub overall: f64,
    pub predicate: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HistoryView {
    pub rows: Vec<HistoryRow>,
    /// Overall achievement per attempt, in attempt order.
    pub trend: Vec<f64>,
}
