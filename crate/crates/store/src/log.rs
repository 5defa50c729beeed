//! Append-only JSON-lines record log with compaction.
//!
//! Every mutation is one line, flushed and synced before the call returns.
//! Compaction rewrites the file as one upsert per entity through a temporary
//! file and an atomic rename. A torn final line (a crash mid-append) is
//! dropped on open; a bad line anywhere else is corruption.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use isol_core::{AssessmentResult, ScoreSheet};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};
use crate::model::{Experiment, User};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Record {
    User {
        user: User,
    },
    Experiment {
        experiment: Box<Experiment>,
    },
    Scores {
        experiment_id: String,
        entries: ScoreSheet,
    },
    Finalize {
        experiment_id: String,
        finalized_at: DateTime<Utc>,
        result: Box<AssessmentResult>,
    },
}

pub struct RecordLog {
    path: PathBuf,
    file: File,
    lines: usize,
}

impl RecordLog {
    /// Open (creating if absent) and return every stored record.
    pub fn open(path: &Path) -> Result<(Self, Vec<Record>)> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;

        let mut records = Vec::new();
        let mut good_len = 0u64;
        let mut reader = BufReader::new(&file);
        let mut buf = String::new();
        let mut line_no = 0;
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf)?;
            if n == 0 {
                break;
            }
            line_no += 1;
            let complete = buf.ends_with('\n');
            let text = buf.trim_end();
            if text.is_empty() {
                good_len += n as u64;
                continue;
            }
            if !complete {
                // torn tail from an interrupted append
                break;
            }
            let record = serde_json::from_str::<Record>(text).map_err(|e| StoreError::Corrupt {
                line: line_no,
                message: e.to_string(),
            })?;
            records.push(record);
            good_len += n as u64;
        }
        drop(reader);
        if file.metadata()?.len() != good_len {
            file.set_len(good_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        let lines = records.len();
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                lines,
            },
            records,
        ))
    }

    pub fn append(&mut self, record: &Record) -> Result<()> {
        let mut line = serde_json::to_vec(record).expect("records serialize");
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.lines += 1;
        Ok(())
    }

    /// Number of records currently in the file.
    pub fn len(&self) -> usize {
        self.lines
    }

    pub fn is_empty(&self) -> bool {
        self.lines == 0
    }

    /// Replace the file contents with `records`.
    pub fn rewrite(&mut self, records: &[Record]) -> Result<()> {
        let tmp = self.path.with_extension("compact.tmp");
        {
            let mut out = File::create(&tmp)?;
            for r in records {
                let mut line = serde_json::to_vec(r).expect("records serialize");
                line.push(b'\n');
                out.write_all(&line)?;
            }
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            if let Ok(d) = File::open(dir) {
                let _ = d.sync_all();
            }
        }
        self.file = OpenOptions::new().read(true).append(true).open(&self.path)?;
        self.lines = records.len();
        Ok(())
    }

    pub fn sync(&self) -> Result<()> {
        self.file.sync_all()?;
        Ok(())
    }
}

#[cfg(test)]
impl RecordLog {
    pub(crate) fn path_for_tests(&self) -> &Path {
        &self.path
    }
}
