//! Embedded case storage: one directory per case holding the append-only
//! audit log (`log.jsonl`, the source of truth) and a snapshot
//! (`snapshot.json`) used for listing.
//!
//! Writers are serialized per case and must state the version they read;
//! a stale version is refused with [`StoreError::Conflict`].

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use gpva_core::caseflow::{parse_json_lines, replay, to_json_lines, CaseError, CaseRecord, CaseSummary};

const LOG_FILE: &str = "log.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("case {0} not found")]
    NotFound(String),
    #[error("case {0} already exists")]
    AlreadyExists(String),
    #[error("version conflict on case {app_id}: expected {expected}, stored {actual}")]
    Conflict { app_id: String, expected: u64, actual: u64 },
    #[error("invalid application id {0:?}")]
    InvalidId(String),
    #[error("storage error at {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("stored case {app_id} is corrupt: {source}")]
    Corrupt { app_id: String, source: CaseError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Application ids become directory names, so only a safe alphabet is allowed.
fn check_id(app_id: &str) -> Result<(), StoreError> {
    let ok = !app_id.is_empty()
        && app_id.len() <= 128
        && !app_id.starts_with('.')
        && app_id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(app_id.to_string()))
    }
}

#[derive(Debug)]
pub struct CaseStore {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl CaseStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io(&root))?;
        Ok(Self { root, locks: Mutex::new(HashMap::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, app_id: &str) -> PathBuf {
        self.root.join(app_id)
    }

    fn lock_for(&self, app_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        Arc::clone(locks.entry(app_id.to_string()).or_default())
    }

    pub fn exists(&self, app_id: &str) -> bool {
        check_id(app_id).is_ok() && self.dir(app_id).join(LOG_FILE).is_file()
    }

    /// Stores a newly submitted case.
    pub fn create(&self, case: &CaseRecord) -> Result<(), StoreError> {
        let app_id = case.app_id();
        check_id(app_id)?;
        let lock = self.lock_for(app_id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let dir = self.dir(app_id);
        match fs::create_dir(&dir) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(StoreError::AlreadyExists(app_id.to_string()))
            }
            Err(e) => return Err(StoreError::Io { path: dir, source: e }),
        }
        self.append(&dir, case, 0)?;
        self.write_snapshot(&dir, case)
    }

    /// Loads a case by replaying its log.
    pub fn load(&self, app_id: &str) -> Result<CaseRecord, StoreError> {
        check_id(app_id)?;
        let path = self.dir(app_id).join(LOG_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(app_id.to_string())),
            Err(e) => return Err(StoreError::Io { path, source: e }),
        };
        let corrupt = |source| StoreError::Corrupt { app_id: app_id.to_string(), source };
        let entries = parse_json_lines(&text).map_err(corrupt)?;
        replay(&entries).map_err(corrupt)
    }

    /// Appends the entries `case` gained since `expected_version` and
    /// refreshes the snapshot. Fails when someone else wrote first.
    pub fn save(&self, case: &CaseRecord, expected_version: u64) -> Result<(), StoreError> {
        let app_id = case.app_id();
        check_id(app_id)?;
        let lock = self.lock_for(app_id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let dir = self.dir(app_id);
        let log = dir.join(LOG_FILE);
        let text = match fs::read_to_string(&log) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(app_id.to_string())),
            Err(e) => return Err(StoreError::Io { path: log, source: e }),
        };
        let actual = text.lines().filter(|l| !l.trim().is_empty()).count() as u64;
        if actual != expected_version || case.version() < expected_version {
            return Err(StoreError::Conflict { app_id: app_id.to_string(), expected: expected_version, actual });
        }
        self.append(&dir, case, expected_version)?;
        self.write_snapshot(&dir, case)
    }

    fn append(&self, dir: &Path, case: &CaseRecord, from: u64) -> Result<(), StoreError> {
        let path = dir.join(LOG_FILE);
        let lines = to_json_lines(case.entries_since(from));
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io(&path))?;
        file.write_all(lines.as_bytes()).map_err(io(&path))?;
        file.sync_data().map_err(io(&path))
    }

    fn write_snapshot(&self, dir: &Path, case: &CaseRecord) -> Result<(), StoreError> {
        let path = dir.join(SNAPSHOT_FILE);
        let tmp = dir.join("snapshot.json.tmp");
        let body = serde_json::to_vec(case).expect("case serializes");
        fs::write(&tmp, body).map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))
    }

    /// Summaries of all cases, ordered by application id. Snapshots are
    /// used when they are current; otherwise the log is replayed.
    pub fn list(&self) -> Result<Vec<CaseSummary>, StoreError> {
        let mut ids: Vec<String> = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io(&self.root))? {
            let entry = entry.map_err(io(&self.root))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if check_id(&name).is_ok() && entry.path().join(LOG_FILE).is_file() {
                ids.push(name);
            }
        }
        ids.sort();
        ids.iter().map(|id| self.summary(id)).collect()
    }

    fn summary(&self, app_id: &str) -> Result<CaseSummary, StoreError> {
        let dir = self.dir(app_id);
        let snapshot = fs::read(dir.join(SNAPSHOT_FILE)).ok().and_then(|b| serde_json::from_slice::<CaseRecord>(&b).ok());
        let log_len = fs::read_to_string(dir.join(LOG_FILE))
            .map(|t| t.lines().filter(|l| !l.trim().is_empty()).count() as u64)
            .unwrap_or(0);
        match snapshot {
            Some(case) if case.version() == log_len => Ok(case.summary()),
            _ => Ok(self.load(app_id)?.summary()),
        }
    }
}
