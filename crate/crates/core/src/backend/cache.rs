//! Persistent replay cache: one JSON file per request digest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{complete, BackendError, ChatBackend, ChatExchange, ChatRequest, ChatResponse};

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    digest: String,
    request: ChatRequest,
    response: ChatResponse,
}

#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    warnings: Mutex<Vec<String>>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, BackendError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| BackendError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            warnings: Mutex::new(Vec::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    /// Stored response for `digest`. Unreadable or mismatched entries count
    /// as misses and leave a warning.
    pub fn get(&self, digest: &str) -> Option<ChatResponse> {
        let path = self.entry_path(digest);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
            Err(e) => {
                self.warn(format!("{}: unreadable cache entry: {e}", path.display()));
                return None;
            }
        };
        match serde_json::from_slice::<CacheEntry>(&bytes) {
            Ok(entry) if entry.digest == digest => Some(entry.response),
            Ok(entry) => {
                self.warn(format!(
                    "{}: cache entry digest {} does not match its file name",
                    path.display(),
                    entry.digest
                ));
                None
            }
            Err(e) => {
                self.warn(format!("{}: corrupt cache entry: {e}", path.display()));
                None
            }
        }
    }

    /// Writes the entry to a temporary file and renames it into place, so
    /// readers never observe a partial entry. Concurrent writers of the same
    /// digest store identical content.
    pub fn put(&self, request: &ChatRequest, response: &ChatResponse) -> Result<(), BackendError> {
        let digest = request.digest();
        let entry = CacheEntry {
            digest: digest.clone(),
            request: request.clone(),
            response: response.clone(),
        };
        let json = serde_json::to_vec_pretty(&entry).expect("cache entry serializes");
        write_atomic(&self.entry_path(&digest), &json)
            .map_err(|e| BackendError::Cache(format!("writing entry {digest}: {e}")))
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(Result::ok)
                    .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Warnings recorded so far (corrupt or unreadable entries).
    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().expect("warnings lock").clone()
    }

    fn warn(&self, message: String) {
        warn!("{message}");
        self.warnings.lock().expect("warnings lock").push(message);
    }
}

/// Write-to-temp-then-rename in the target's directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Answers from the cache when possible, otherwise calls the backend and
/// stores the response.
pub fn cached_complete(
    cache: &ResponseCache,
    backend: &dyn ChatBackend,
    req: &ChatRequest,
) -> Result<ChatExchange, BackendError> {
    req.validate()?;
    let digest = req.digest();
    if let Some(response) = cache.get(&digest) {
        return Ok(ChatExchange {
            request: req.clone(),
            response,
            cache_hit: true,
            request_digest: digest,
        });
    }
    let response = complete(backend, req)?;
    cache.put(req, &response)?;
    Ok(ChatExchange {
        request: req.clone(),
        response,
        cache_hit: false,
        request_digest: digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, MockConfig};

    fn setup() -> (tempfile::TempDir, ResponseCache, MockBackend) {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path().join("cache")).unwrap();
        (dir, cache, MockBackend::new(MockConfig::default()))
    }

    #[test]
    fn cold_then_warm() {
        let (_dir, cache, mock) = setup();
        let req = ChatRequest::zero_shot("m", 0.7, 8, "semma padam...");
        let first = cached_complete(&cache, &mock, &req).unwrap();
        assert!(!first.cache_hit);
        assert_eq!(cache.len(), 1);
        assert_eq!(mock.calls(), 1);

        let second = cached_complete(&cache, &mock, &req).unwrap();
        assert!(second.cache_hit);
        assert_eq!(second.response.content, first.response.content);
        assert_eq!(second.request_digest, first.request_digest);
        assert_eq!(mock.calls(), 1);
    }

    #[test]
    fn temperature_splits_entries() {
        let (_dir, cache, mock) = setup();
        let a = cached_complete(&cache, &mock, &ChatRequest::zero_shot("m", 0.7, 8, "same")).unwrap();
        let b = cached_complete(&cache, &mock, &ChatRequest::zero_shot("m", 0.9, 8, "same")).unwrap();
        assert_ne!(a.request_digest, b.request_digest);
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn corrupt_entry_is_a_miss_with_warning() {
        let (_dir, cache, mock) = setup();
        let req = ChatRequest::zero_shot("m", 0.7, 8, "text");
        fs::write(cache.entry_path(&req.digest()), b"{ truncated").unwrap();
        let ex = cached_complete(&cache, &mock, &req).unwrap();
        assert!(!ex.cache_hit);
        assert_eq!(cache.warnings().len(), 1);
        // the rewrite repairs the entry
        assert!(cached_complete(&cache, &mock, &req).unwrap().cache_hit);
    }

    #[test]
    fn survives_reopen() {
        let (dir, cache, mock) = setup();
        let req = ChatRequest::zero_shot("m", 0.8, 8, "persist me");
        cached_complete(&cache, &mock, &req).unwrap();
        drop(cache);
        let reopened = ResponseCache::open(dir.path().join("cache")).unwrap();
        assert!(cached_complete(&reopened, &mock, &req).unwrap().cache_hit);
    }
}
