//! Record/replay fixture stores keyed by canonical request hash.
//!
//! A store is a single JSON file:
//!
//! ```json
//! { "version": 1, "entries": [ { "hash": "...", "request": {...}, "response": {...} } ] }
//! ```
//!
//! Entries are written sorted by hash so re-recording the same interactions
//! produces the same bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tracing::debug;

use super::{Backend, BackendError, BackendRequest, BackendResponse};

const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub hash: String,
    pub request: BackendRequest,
    pub response: BackendResponse,
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    version: u32,
    entries: Vec<FixtureEntry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureStore {
    entries: BTreeMap<String, FixtureEntry>,
}

impl FixtureStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &FixtureEntry> {
        self.entries.values()
    }

    pub fn get(&self, request: &BackendRequest) -> Option<&BackendResponse> {
        self.entries
            .get(&request.canonical_hash())
            .map(|e| &e.response)
    }

    pub fn insert(&mut self, request: BackendRequest, response: BackendResponse) {
        let hash = request.canonical_hash();
        self.entries.insert(
            hash.clone(),
            FixtureEntry {
                hash,
                request,
                response,
            },
        );
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, BackendError> {
        let corrupt = |message: String| BackendError::CorruptStore {
            path: origin.to_string(),
            message,
        };
        let file: StoreFile = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
        if file.version != STORE_VERSION {
            return Err(corrupt(format!(
                "unsupported store version {}",
                file.version
            )));
        }
        let mut entries = BTreeMap::new();
        for entry in file.entries {
            let expected = entry.request.canonical_hash();
            if entry.hash != expected {
                return Err(corrupt(format!(
                    "entry hash {} does not match its request ({expected})",
                    entry.hash
                )));
            }
            if entry.response.kind() != entry.request.kind() {
                return Err(corrupt(format!(
                    "entry {} pairs mismatched kinds",
                    entry.hash
                )));
            }
            if entries.contains_key(&entry.hash) {
                return Err(corrupt(format!("duplicate entry {}", entry.hash)));
            }
            entries.insert(entry.hash.clone(), entry);
        }
        Ok(FixtureStore { entries })
    }

    pub fn to_json(&self) -> String {
        let file = StoreFile {
            version: STORE_VERSION,
            entries: self.entries.values().cloned().collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("store serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Writes via a sibling temp file and rename.
    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Read-only backend answering from a fixture store.
#[derive(Debug, Clone)]
pub struct FixtureReplay {
    store: FixtureStore,
}

impl FixtureReplay {
    pub fn new(store: FixtureStore) -> Self {
        FixtureReplay { store }
    }

    pub fn store(&self) -> &FixtureStore {
        &self.store
    }
}

impl Backend for FixtureReplay {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        match self.store.get(request) {
            Some(response) => Ok(response.clone()),
            None => Err(BackendError::FixtureMiss {
                kind: request.kind(),
                hash: request.canonical_hash(),
            }),
        }
    }
}

/// Opens a replay backend over the store at `path`.
pub fn fixture_replay(path: &Path) -> Result<FixtureReplay, BackendError> {
    Ok(FixtureReplay::new(FixtureStore::load(path)?))
}

/// Forwards to an inner backend and persists every successful exchange.
pub struct FixtureRecorder<B> {
    inner: B,
    path: PathBuf,
    store: Mutex<FixtureStore>,
}

impl<B: Backend> FixtureRecorder<B> {
    /// Extends the store at `path` if it exists, otherwise starts an empty one.
    pub fn new(inner: B, path: impl Into<PathBuf>) -> Result<Self, BackendError> {
        let path = path.into();
        let store = if path.exists() {
            FixtureStore::load(&path)?
        } else {
            let store = FixtureStore::new();
            store.save(&path)?;
            store
        };
        Ok(FixtureRecorder {
            inner,
            path,
            store: Mutex::new(store),
        })
    }

    pub fn snapshot(&self) -> FixtureStore {
        self.store.lock().expect("fixture store lock").clone()
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

pub fn fixture_record<B: Backend>(
    inner: B,
    store_path: impl Into<PathBuf>,
) -> Result<FixtureRecorder<B>, BackendError> {
    FixtureRecorder::new(inner, store_path)
}

impl<B: Backend> Backend for FixtureRecorder<B> {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        let response = self.inner.call(request)?;
        let mut store = self.store.lock().expect("fixture store lock");
        if store.get(request) != Some(&response) {
            debug!(hash = %request.canonical_hash(), kind = %request.kind(), "recording fixture");
            store.insert(request.clone(), response.clone());
            store.save(&self.path)?;
        }
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::QaAnswer;

    struct Echo;
    impl Backend for Echo {
        fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
            Ok(match request {
                BackendRequest::Qa { question, .. } => {
                    BackendResponse::Qa(QaAnswer::answered(question.to_uppercase()))
                }
                BackendRequest::Qg { text, .. } => BackendResponse::Qg {
                    questions: vec![format!("{text}?")],
                },
                BackendRequest::Embed { .. } => unreachable!(),
            })
        }
    }

    #[test]
    fn record_then_replay_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        let recorder = fixture_record(Echo, &path).unwrap();
        let req = BackendRequest::qa("who?", "ctx");
        let live = recorder.call(&req).unwrap();

        let replay = fixture_replay(&path).unwrap();
        let replayed = replay.call(&req).unwrap();
        assert_eq!(
            serde_json::to_vec(&live).unwrap(),
            serde_json::to_vec(&replayed).unwrap()
        );
    }

    #[test]
    fn unseen_request_is_a_miss_naming_the_hash() {
        let replay = FixtureReplay::new(FixtureStore::new());
        let req = BackendRequest::qg("text", 2);
        match replay.call(&req) {
            Err(BackendError::FixtureMiss { hash, .. }) => assert_eq!(hash, req.canonical_hash()),
            other => panic!("expected miss, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_entries_fail_to_load() {
        let mut store = FixtureStore::new();
        store.insert(
            BackendRequest::qg("t", 1),
            BackendResponse::Qg { questions: vec![] },
        );
        let json = store.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let entry = value["entries"][0].clone();
        let doubled = serde_json::json!({ "version": 1, "entries": [entry.clone(), entry] });
        let err = FixtureStore::from_json(&doubled.to_string(), "mem").unwrap_err();
        assert!(matches!(err, BackendError::CorruptStore { .. }), "{err}");
    }

    #[test]
    fn tampered_hash_fails_to_load() {
        let text = r#"{"version":1,"entries":[{"hash":"00","request":{"kind":"qg","text":"t","max_questions":1},"response":{"kind":"qg","questions":[]}}]}"#;
        assert!(matches!(
            FixtureStore::from_json(text, "mem"),
            Err(BackendError::CorruptStore { .. })
        ));
        assert!(FixtureStore::from_json("not json", "mem").is_err());
    }

    #[test]
    fn store_round_trips_byte_identically() {
        let mut store = FixtureStore::new();
        store.insert(
            BackendRequest::qa("b?", "c"),
            BackendResponse::Qa(QaAnswer::unanswerable()),
        );
        store.insert(
            BackendRequest::qa("a?", "c"),
            BackendResponse::Qa(QaAnswer::answered("x")),
        );
        let json = store.to_json();
        let again = FixtureStore::from_json(&json, "mem").unwrap();
        assert_eq!(again, store);
        assert_eq!(again.to_json(), json);
    }

    #[test]
    fn recorder_extends_existing_store() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.json");
        fixture_record(Echo, &path)
            .unwrap()
            .call(&BackendRequest::qa("a?", "c"))
            .unwrap();
        let second = fixture_record(Echo, &path).unwrap();
        second.call(&BackendRequest::qg("t", 1)).unwrap();
        assert_eq!(FixtureStore::load(&path).unwrap().len(), 2);
    }
}
