//! The live knowledge base: an atomically swappable snapshot.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use gpva_core::kb::{parse_kb, KbError, KbFormat, KbVersion, KnowledgeBase};

#[derive(Debug, thiserror::Error)]
pub enum KbLoadError {
    #[error("cannot read KB {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("KB validation failed: {0}")]
    Invalid(#[from] KbError),
    #[error("KB version {new} is not newer than the active version {current}")]
    NotNewer { current: KbVersion, new: KbVersion },
}

/// Reads and validates a KB file.
pub fn load_kb(path: &Path) -> Result<KnowledgeBase, KbLoadError> {
    let bytes = std::fs::read(path).map_err(|source| KbLoadError::Read { path: path.to_path_buf(), source })?;
    Ok(parse_kb(&bytes, KbFormat::Json)?)
}

/// Holds the active KB. Readers take an `Arc` snapshot and keep using it
/// even if a reload swaps in a newer version meanwhile, so one verification
/// always sees exactly one KB version.
#[derive(Debug)]
pub struct KbHandle {
    current: RwLock<Arc<KnowledgeBase>>,
}

impl KbHandle {
    pub fn new(kb: KnowledgeBase) -> Self {
        Self { current: RwLock::new(Arc::new(kb)) }
    }

    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn version(&self) -> KbVersion {
        self.snapshot().version().clone()
    }

    /// Swaps in `kb` if its version is strictly newer; otherwise the active
    /// snapshot stays in place.
    pub fn replace(&self, kb: KnowledgeBase) -> Result<KbVersion, KbLoadError> {
        let mut guard = self.current.write().unwrap_or_else(|e| e.into_inner());
        if kb.version() <= guard.version() {
            return Err(KbLoadError::NotNewer { current: guard.version().clone(), new: kb.version().clone() });
        }
        let version = kb.version().clone();
        *guard = Arc::new(kb);
        Ok(version)
    }

    pub fn reload_from_path(&self, path: &Path) -> Result<KbVersion, KbLoadError> {
        self.replace(load_kb(path)?)
    }

    pub fn reload_from_bytes(&self, bytes: &[u8]) -> Result<KbVersion, KbLoadError> {
        self.replace(parse_kb(bytes, KbFormat::Json)?)
    }
}
