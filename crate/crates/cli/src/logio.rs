//! File-backed blackbox log with per-record durability.
//!
//! One writer per log; every append is written and synced to stable storage
//! before returning, so a crash can tear at most the final record, which the
//! reader detects and ignores. Appends that would break the sequence or
//! timestamp invariants are rejected without writing.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::blackbox::{
    is_identifier, scan_log, seal, BlackboxRecord, IntegrityReport, PrecisionMap, RecordDraft,
};

#[derive(Debug, Error)]
pub enum BlackboxError {
    #[error("sequence gap: expected seq {expected}, got {found}")]
    SequenceGap { expected: u64, found: u64 },

    #[error("timestamp regression: last t_ms {last}, got {found}")]
    TimestampRegression { last: u64, found: u64 },

    #[error("channel `{0}` is not a valid identifier")]
    BadChannel(String),

    #[error("refusing to append to `{0}`: log has integrity findings")]
    DirtyLog(PathBuf),

    #[error("durable write failed: {0}")]
    DurableWrite(#[source] io::Error),

    #[error("read failed: {0}")]
    Read(#[source] io::Error),
}

/// Append handle over one log file.
pub struct BlackboxLog {
    file: File,
    last: Option<(u64, u64)>,
    precision: PrecisionMap,
}

impl BlackboxLog {
    /// Creates or truncates a log.
    pub fn create(path: &Path) -> Result<Self, BlackboxError> {
        let file = File::create(path).map_err(BlackboxError::DurableWrite)?;
        Ok(BlackboxLog {
            file,
            last: None,
            precision: PrecisionMap::default(),
        })
    }

    /// Opens an existing log for appending. The log must verify clean; the
    /// writer recovers its position from the tail.
    pub fn open_append(path: &Path) -> Result<Self, BlackboxError> {
        let (records, report) = read_log(path)?;
        if !report.is_clean() {
            return Err(BlackboxError::DirtyLog(path.to_path_buf()));
        }
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(BlackboxError::DurableWrite)?;
        Ok(BlackboxLog {
            file,
            last: records.last().map(|r| (r.seq, r.t_ms)),
            precision: PrecisionMap::default(),
        })
    }

    pub fn with_precision(mut self, precision: PrecisionMap) -> Self {
        self.precision = precision;
        self
    }

    /// Validates, checksums, writes, and syncs one record. The record is on
    /// stable storage when this returns.
    pub fn append(&mut self, draft: RecordDraft) -> Result<BlackboxRecord, BlackboxError> {
        if !is_identifier(&draft.channel) {
            return Err(BlackboxError::BadChannel(draft.channel));
        }
        let expected = self.last.map_or(0, |(seq, _)| seq + 1);
        if draft.seq != expected {
            return Err(BlackboxError::SequenceGap {
                expected,
                found: draft.seq,
            });
        }
        if let Some((_, last_t)) = self.last {
            if draft.t_ms < last_t {
                return Err(BlackboxError::TimestampRegression {
                    last: last_t,
                    found: draft.t_ms,
                });
            }
        }
        let (record, line) = seal(&draft, self.precision.for_channel(&draft.channel));
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.write_all(b"\n"))
            .and_then(|_| self.file.flush())
            .and_then(|_| self.file.sync_data())
            .map_err(BlackboxError::DurableWrite)?;
        self.last = Some((record.seq, record.t_ms));
        Ok(record)
    }
}

/// Reads and verifies a log file. Raw bytes go straight to the scanner so
/// corruption never masquerades as an IO error.
pub fn read_log(path: &Path) -> Result<(Vec<BlackboxRecord>, IntegrityReport), BlackboxError> {
    let contents = std::fs::read(path).map_err(BlackboxError::Read)?;
    Ok(scan_log(&contents))
}
