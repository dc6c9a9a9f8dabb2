//! Append-only JSON-lines persistence for experiment records.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::{RecordKey, StoredRecord};

/// A file-backed record set. Appends are flushed line by line, so a
/// killed run loses at most the record being written; reopening the file
/// resumes from everything that made it to disk.
#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    file: File,
    records: Vec<StoredRecord>,
    keys: BTreeSet<RecordKey>,
}

impl RecordStore {
    /// Opens (or creates) the store at `path` and loads existing records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut records = Vec::new();
        let mut keys = BTreeSet::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: StoredRecord =
                    serde_json::from_str(&line).map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad record: {e}"),
                    })?;
                keys.insert(record.key());
                records.push(record);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file,
            records,
            keys,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.keys.contains(key)
    }

    /// Appends one record and flushes it to disk. Duplicate keys are
    /// rejected: the key identifies the record, so a second copy could
    /// only disagree.
    pub fn append(&mut self, record: &StoredRecord) -> Result<()> {
        let key = record.key();
        if self.keys.contains(&key) {
            return Err(Error::InvalidSpec(format!(
                "duplicate record key {key:?}"
            )));
        }
        let line = serde_json::to_string(record)?;
        self.file.write_all(line.as_bytes())?;
        self.file.write_all(b"\n")?;
        self.file.flush()?;
        self.keys.insert(key);
        self.records.push(record.clone());
        Ok(())
    }

    pub fn records(&self) -> &[StoredRecord] {
        &self.records
    }

    /// Successful records only.
    pub fn ok_records(&self) -> Vec<super::ExperimentRecord> {
        self.records
            .iter()
            .filter_map(|r| match r {
                StoredRecord::Ok(rec) => Some(rec.clone()),
                StoredRecord::Failed(_) => None,
            })
            .collect()
    }

    /// Failure records only.
    pub fn failures(&self) -> Vec<super::CellFailure> {
        self.records
            .iter()
            .filter_map(|r| match r {
                StoredRecord::Failed(f) => Some(f.clone()),
                StoredRecord::Ok(_) => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{ExperimentRecord, Method};
    use std::collections::BTreeMap;
    use tempfile::tempdir;

    fn record(seed: u64) -> StoredRecord {
        StoredRecord::Ok(ExperimentRecord {
            method: Method::Uniform,
            d: 2,
            n: 4,
            seed,
            discrepancy: 0.5,
            wall_time_seconds: 0.01,
            variant_flags: BTreeMap::from([("discrepancy".to_string(), "classical".to_string())]),
        })
    }

    #[test]
    fn round_trips_through_disk() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("nested/records.jsonl");
        let mut store = RecordStore::open(&path).unwrap();
        store.append(&record(0)).unwrap();
        store.append(&record(1)).unwrap();
        drop(store);

        let reopened = RecordStore::open(&path).unwrap();
        assert_eq!(reopened.records().len(), 2);
        assert!(reopened.contains(&record(0).key()));
        assert!(!reopened.contains(&record(7).key()));
    }

    #[test]
    fn rejects_duplicate_keys() {
        let dir = tempdir().unwrap();
        let mut store = RecordStore::open(dir.path().join("records.jsonl")).unwrap();
        store.append(&record(0)).unwrap();
        assert!(store.append(&record(0)).is_err());
    }

    #[test]
    fn reports_corrupt_lines_with_position() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        std::fs::write(&path, "{\"not\": \"a record\"}\n").unwrap();
        match RecordStore::open(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
