use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::vsql::{OperatorSignature, VirtualTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub signature: OperatorSignature,
    /// Clock reading when the table was stored, in milliseconds.
    pub stored_at: i64,
    pub table: Arc<VirtualTable>,
}

/// Tables keyed by operator signature, optionally mirrored to a directory
/// with one JSON file per signature.
#[derive(Debug, Default)]
pub(crate) struct Cache {
    entries: Mutex<HashMap<OperatorSignature, CacheEntry>>,
    spill_dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(spill_dir: Option<PathBuf>) -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
            spill_dir,
        }
    }

    fn spill_path(&self, sig: &OperatorSignature) -> Option<PathBuf> {
        let dir = self.spill_dir.as_ref()?;
        let digest = hex::encode(Sha256::digest(sig.to_string().as_bytes()));
        Some(dir.join(format!("{digest}.json")))
    }

    pub fn get(&self, sig: &OperatorSignature) -> Option<CacheEntry> {
        if let Some(e) = self.lock().get(sig) {
            return Some(e.clone());
        }
        let path = self.spill_path(sig)?;
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(entry) if &entry.signature == sig => {
                self.lock().insert(sig.clone(), entry.clone());
                Some(entry)
            }
            Ok(_) => None,
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "ignoring unreadable cache file");
                None
            }
        }
    }

    pub fn put(&self, entry: CacheEntry) {
        if let Some(path) = self.spill_path(&entry.signature) {
            let res = path
                .parent()
                .map_or(Ok(()), fs::create_dir_all)
                .and_then(|_| {
                    let json = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
                    fs::write(&path, json)
                });
            if let Err(e) = res {
                tracing::warn!(path = %path.display(), error = %e, "could not spill cache entry");
            }
        }
        self.lock().insert(entry.signature.clone(), entry);
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    /// Drops in-memory entries and spilled files.
    pub fn clear(&self) {
        let mut entries = self.lock();
        if self.spill_dir.is_some() {
            for sig in entries.keys() {
                if let Some(p) = self.spill_path(sig) {
                    let _ = fs::remove_file(p);
                }
            }
        }
        entries.clear();
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<OperatorSignature, CacheEntry>> {
        self.entries.lock().unwrap_or_else(|p| p.into_inner())
    }
}
