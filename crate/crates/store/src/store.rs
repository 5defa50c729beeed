use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use isol_core::{check_sheet, evaluate_at, AssessmentResult, Mode, ScoreSheet, Taxonomy};

use crate::catalog::Catalog;
use crate::clock::{Clock, SystemClock};
use crate::credentials::{hash_secret, new_token, verify_secret};
use crate::error::{Result, StoreError};
use crate::log::{Record, RecordLog};
use crate::model::{Experiment, HistoryRow, HistoryView, User};

/// Compact once the log holds this many more lines than live entities.
const DEFAULT_COMPACT_SLACK: usize = 1024;

struct State {
    log: RecordLog,
    users: BTreeMap<String, User>,
    usernames: HashMap<String, String>,
    experiments: BTreeMap<String, Experiment>,
    compact_slack: usize,
}

impl State {
    fn apply(&mut self, record: Record) -> Result<()> {
        match record {
            Record::User { user } => {
                self.usernames.insert(user.username.clone(), user.id.clone());
                self.users.insert(user.id.clone(), user);
            }
            Record::Experiment { experiment } => {
                self.experiments.insert(experiment.id.clone(), *experiment);
            }
            Record::Scores {
                experiment_id,
                entries,
            } => self.experiment_mut(&experiment_id)?.sheet.merge(&entries),
            Record::Finalize {
                experiment_id,
                finalized_at,
                result,
            } => {
                let e = self.experiment_mut(&experiment_id)?;
                e.finalized_at = Some(finalized_at);
                e.result = Some(*result);
            }
        }
        Ok(())
    }

    fn experiment_mut(&mut self, id: &str) -> Result<&mut Experiment> {
        self.experiments.get_mut(id).ok_or_else(|| StoreError::Corrupt {
            line: 0,
            message: format!("record for unknown experiment `{id}`"),
        })
    }

    /// Durably append, then apply.
    fn commit(&mut self, record: Record) -> Result<()> {
        self.log.append(&record)?;
        self.apply(record)?;
        let live = self.users.len() + self.experiments.len();
        if self.log.len() > live + self.compact_slack {
            self.compact()?;
        }
        Ok(())
    }

    fn snapshot(&self) -> Vec<Record> {
        let users = self.users.values().map(|u| Record::User { user: u.clone() });
        let exps = self.experiments.values().map(|e| Record::Experiment {
            experiment: Box::new(e.clone()),
        });
        users.chain(exps).collect()
    }

    fn compact(&mut self) -> Result<()> {
        let records = self.snapshot();
        self.log.rewrite(&records)
    }
}

/// Single-file store for users and experiments.
///
/// Mutations are serialized behind one write lock and are on disk before
/// they return; reads share a consistent snapshot. Session tokens live in
/// memory only.
pub struct Store {
    catalog: Catalog,
    clock: Arc<dyn Clock>,
    state: RwLock<State>,
    sessions: RwLock<HashMap<String, String>>,
}

impl Store {
    pub fn open(path: impl AsRef<Path>, catalog: Catalog) -> Result<Self> {
        Self::open_with_clock(path, catalog, Arc::new(SystemClock))
    }

    pub fn open_with_clock(path: impl AsRef<Path>, catalog: Catalog, clock: Arc<dyn Clock>) -> Result<Self> {
        let (log, records) = RecordLog::open(path.as_ref())?;
        let mut state = State {
            log,
            users: BTreeMap::new(),
            usernames: HashMap::new(),
            experiments: BTreeMap::new(),
            compact_slack: DEFAULT_COMPACT_SLACK,
        };
        for r in records {
            state.apply(r)?;
        }
        Ok(Self {
            catalog,
            clock,
            state: RwLock::new(state),
            sessions: RwLock::new(HashMap::new()),
        })
    }

    /// Lower the compaction threshold (mainly for tests).
    pub fn set_compact_slack(&self, slack: usize) {
        self.write().compact_slack = slack;
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.state.write().unwrap_or_else(|p| p.into_inner())
    }

    fn taxonomy(&self, id: &str) -> Result<&Arc<Taxonomy>> {
        self.catalog.get(id).ok_or_else(|| StoreError::NotFound {
            kind: "taxonomy",
            id: id.to_string(),
        })
    }

    fn taxonomy_for(&self, e: &Experiment) -> Result<&Arc<Taxonomy>> {
        let t = self.taxonomy(&e.taxonomy_id)?;
        if t.version != e.taxonomy_version {
            return Err(StoreError::VersionMismatch {
                taxonomy_id: e.taxonomy_id.clone(),
                recorded: e.taxonomy_version.clone(),
                current: t.version.clone(),
            });
        }
        Ok(t)
    }

    pub fn register_user(&self, username: &str, secret: &str) -> Result<User> {
        let username = username.trim();
        if username.is_empty() {
            return Err(StoreError::InvalidInput("username must not be empty".into()));
        }
        if secret.is_empty() {
            return Err(StoreError::InvalidInput("secret must not be empty".into()));
        }
        let credential_hash = hash_secret(secret);
        let mut state = self.write();
        if state.usernames.contains_key(username) {
            return Err(StoreError::DuplicateUsername(username.to_string()));
        }
        let user = User {
            id: format!("u{:06}", state.users.len() + 1),
            username: username.to_string(),
            credential_hash,
            created_at: self.clock.now(),
        };
        state.commit(Record::User { user: user.clone() })?;
        Ok(user)
    }

    /// Exchange credentials for a session token.
    pub fn authenticate(&self, username: &str, secret: &str) -> Result<String> {
        let user = self.user_by_name(username.trim()).ok_or(StoreError::AuthFailure)?;
        if !verify_secret(&user.credential_hash, secret) {
            return Err(StoreError::AuthFailure);
        }
        let token = new_token();
        self.sessions
            .write()
            .unwrap_or_else(|p| p.into_inner())
            .insert(token.clone(), user.id);
        Ok(token)
    }

    pub fn user_for_token(&self, token: &str) -> Result<User> {
        let id = self
            .sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(token)
            .cloned()
            .ok_or(StoreError::AuthFailure)?;
        self.user(&id).ok_or(StoreError::AuthFailure)
    }

    pub fn logout(&self, token: &str) {
        self.sessions.write().unwrap_or_else(|p| p.into_inner()).remove(token);
    }

    pub fn user(&self, id: &str) -> Option<User> {
        self.read().users.get(id).cloned()
    }

    pub fn user_by_name(&self, username: &str) -> Option<User> {
        let state = self.read();
        let id = state.usernames.get(username)?;
        state.users.get(id).cloned()
    }

    pub fn start_experiment(&self, user_id: &str, taxonomy_id: &str) -> Result<Experiment> {
        let taxonomy = self.taxonomy(taxonomy_id)?;
        let mut state = self.write();
        if !state.users.contains_key(user_id) {
            return Err(StoreError::NotFound {
                kind: "user",
                id: user_id.to_string(),
            });
        }
        let previous = state
            .experiments
            .values()
            .filter(|e| e.user_id == user_id && e.taxonomy_id == taxonomy_id)
            .map(|e| e.attempt_number)
            .max()
            .unwrap_or(0);
        let experiment = Experiment {
            id: format!("e{:06}", state.experiments.len() + 1),
            user_id: user_id.to_string(),
            taxonomy_id: taxonomy_id.to_string(),
            taxonomy_version: taxonomy.version.clone(),
            attempt_number: previous + 1,
            started_at: self.clock.now(),
            finalized_at: None,
            sheet: ScoreSheet::new(),
            result: None,
        };
        state.commit(Record::Experiment {
            experiment: Box::new(experiment.clone()),
        })?;
        Ok(experiment)
    }

    pub fn experiment(&self, id: &str) -> Result<Experiment> {
        self.read().experiments.get(id).cloned().ok_or_else(|| StoreError::NotFound {
            kind: "experiment",
            id: id.to_string(),
        })
    }

    /// Experiments of one user, oldest first.
    pub fn experiments_of(&self, user_id: &str) -> Vec<Experiment> {
        self.read()
            .experiments
            .values()
            .filter(|e| e.user_id == user_id)
            .cloned()
            .collect()
    }

    fn open_experiment<'a>(state: &'a State, id: &str) -> Result<&'a Experiment> {
        let e = state.experiments.get(id).ok_or_else(|| StoreError::NotFound {
            kind: "experiment",
            id: id.to_string(),
        })?;
        if e.is_finalized() {
            return Err(StoreError::AlreadyFinalized(id.to_string()));
        }
        Ok(e)
    }

    /// Merge `entries` into an open experiment; the last write per issue wins.
    pub fn record_scores(&self, experiment_id: &str, entries: &ScoreSheet) -> Result<Experiment> {
        let mut state = self.write();
        let e = Self::open_experiment(&state, experiment_id)?;
        check_sheet(self.taxonomy_for(e)?, entries)?;
        state.commit(Record::Scores {
            experiment_id: experiment_id.to_string(),
            entries: entries.clone(),
        })?;
        Ok(state.experiments[experiment_id].clone())
    }

    pub fn finalize_experiment(&self, experiment_id: &str, mode: Mode) -> Result<AssessmentResult> {
        let mut state = self.write();
        let e = Self::open_experiment(&state, experiment_id)?;
        let taxonomy = self.taxonomy_for(e)?;
        let now = self.clock.now();
        let result: AssessmentResult = evaluate_at(taxonomy, &e.sheet, mode, now)?;
        state.commit(Record::Finalize {
            experiment_id: experiment_id.to_string(),
            finalized_at: now,
            result: Box::new(result.clone()),
        })?;
        Ok(result)
    }

    /// Evaluate an experiment's current sheet without storing anything.
    pub fn preview(&self, experiment_id: &str, mode: Mode) -> Result<AssessmentResult> {
        let e = self.experiment(experiment_id)?;
        let taxonomy = self.taxonomy_for(&e)?;
        Ok(evaluate_at(taxonomy, &e.sheet, mode, self.clock.now())?)
    }

    /// Re-run the evaluation of a finalized experiment and compare it with
    /// the stored result.
    pub fn reevaluates_identically(&self, experiment_id: &str) -> Result<bool> {
        let e = self.experiment(experiment_id)?;
        let Some(stored) = &e.result else {
            return Ok(false);
        };
        let taxonomy = self.taxonomy_for(&e)?;
        let again: AssessmentResult = evaluate_at(taxonomy, &e.sheet, stored.mode, stored.evaluated_at)?;
        Ok(&again == stored)
    }

    pub fn history(&self, user_id: &str, taxonomy_id: &str) -> HistoryView {
        let state = self.read();
        let mut rows: Vec<HistoryRow> = state
            .experiments
            .values()
            .filter(|e| e.user_id == user_id && e.taxonomy_id == taxonomy_id)
            .filter_map(|e| {
                let result = e.result.as_ref()?;
                let finalized_at = e.finalized_at?;
                Some(HistoryRow {
                    experiment_id: e.id.clone(),
                    attempt_number: e.attempt_number,
                    started_at: e.started_at,
                    finalized_at,
                    duration_seconds: (finalized_at - e.started_at).num_seconds(),
                    overall: result.overall.achievement,
                    predicate: result.overall.predicate.clone(),
                })
            })
            .collect();
        rows.sort_by_key(|r| r.attempt_number);
        let trend = rows.iter().map(|r| r.overall).collect();
        HistoryView { rows, trend }
    }

    /// All experiments as pretty JSON, for backup.
    pub fn export_json(&self) -> Vec<u8> {
        let state = self.read();
        let all: Vec<&Experiment> = state.experiments.values().collect();
        let mut out = serde_json::to_vec_pretty(&all).expect("experiments serialize");
        out.push(b'\n');
        out
    }

    pub fn compact(&self) -> Result<()> {
        self.write().compact()
    }

    /// Sync the store file to disk.
    pub fn flush(&self) -> Result<()> {
        self.read().log.sync()
    }

    /// Lines currently in the backing file.
    pub fn log_len(&self) -> usize {
        self.read().log.len()
    }
}
