//! Model-inference boundary: token embeddings, question generation and
//! question answering behind one request/response interface.
//!
//! [`remote::RemoteBackend`] speaks the HTTP wire protocol; [`fixture`]
//! provides record/replay stores so metric code can run without any model.

pub mod fixture;
pub mod remote;
pub mod synthetic;

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embed::TokenEmbeddings;

pub use fixture::{fixture_record, fixture_replay, FixtureRecorder, FixtureReplay, FixtureStore};
pub use remote::{remote_call, RemoteBackend, RetryPolicy};
pub use synthetic::SyntheticBackend;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no fixture recorded for {kind} request {hash}")]
    FixtureMiss { kind: RequestKind, hash: String },
    #[error("corrupt fixture store {path}: {message}")]
    CorruptStore { path: String, message: String },
    #[error("fixture store i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Embed,
    Qg,
    Qa,
}

impl RequestKind {
    pub fn path(self) -> &'static str {
        match self {
            RequestKind::Embed => "embed",
            RequestKind::Qg => "qg",
            RequestKind::Qa => "qa",
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.path())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendRequest {
    Embed { texts: Vec<String> },
    Qg { text: String, max_questions: u32 },
    Qa { question: String, context: String },
}

impl BackendRequest {
    pub fn embed<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        BackendRequest::Embed {
            texts: texts.into_iter().map(Into::into).collect(),
        }
    }

    pub fn qg(text: impl Into<String>, max_questions: u32) -> Self {
        BackendRequest::Qg {
            text: text.into(),
            max_questions,
        }
    }

    pub fn qa(question: impl Into<String>, context: impl Into<String>) -> Self {
        BackendRequest::Qa {
            question: question.into(),
            context: context.into(),
        }
    }

    pub fn kind(&self) -> RequestKind {
        match self {
            BackendRequest::Embed { .. } => RequestKind::Embed,
            BackendRequest::Qg { .. } => RequestKind::Qg,
            BackendRequest::Qa { .. } => RequestKind::Qa,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let blank = |s: &str| s.trim().is_empty();
        let problem = match self {
            BackendRequest::Embed { texts } if texts.is_empty() => {
                Some("embed request has no texts")
            }
            BackendRequest::Embed { texts } if texts.iter().any(|t| blank(t)) => {
                Some("embed request contains an empty text")
            }
            BackendRequest::Qg { text, .. } if blank(text) => Some("qg text is empty"),
            BackendRequest::Qg {
                max_questions: 0, ..
            } => Some("max_questions must be at least 1"),
            BackendRequest::Qa { question, .. } if blank(question) => Some("qa question is empty"),
            _ => None,
        };
        match problem {
            Some(msg) => Err(BackendError::InvalidRequest(msg.to_string())),
            None => Ok(()),
        }
    }

    /// JSON body sent over the wire (no `kind` tag).
    pub fn wire_body(&self) -> Value {
        match self {
            BackendRequest::Embed { texts } => serde_json::json!({ "texts": texts }),
            BackendRequest::Qg {
                text,
                max_questions,
            } => {
                serde_json::json!({ "text": text, "max_questions": max_questions })
            }
            BackendRequest::Qa { question, context } => {
                serde_json::json!({ "question": question, "context": context })
            }
        }
    }

    /// Sorted keys, no insignificant whitespace, and whitespace runs inside
    /// strings collapsed to one space with the ends trimmed.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("request serializes");
        let mut out = String::new();
        write_canonical(&value, &mut out);
        out
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn canonical_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, out);
            }
            out.push(']');
        }
        Value::String(s) => {
            let collapsed = s.split_whitespace().collect::<Vec<_>>().join(" ");
            out.push_str(&Value::String(collapsed).to_string());
        }
        other => out.push_str(&other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaAnswer {
    pub answer: String,
    pub unanswerable: bool,
}

impl QaAnswer {
    pub fn unanswerable() -> Self {
        QaAnswer {
            answer: String::new(),
            unanswerable: true,
        }
    }

    pub fn answered(text: impl Into<String>) -> Self {
        QaAnswer {
            answer: text.into(),
            unanswerable: false,
        }
    }

    /// The answer text, or `None` when unanswerable or blank.
    pub fn text(&self) -> Option<&str> {
        if self.unanswerable || self.answer.trim().is_empty() {
            None
        } else {
            Some(&self.answer)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendResponse {
    Embed { embeddings: Vec<TokenEmbeddings> },
    Qg { questions: Vec<String> },
    Qa(QaAnswer),
}

impl BackendResponse {
    pub fn kind(&self) -> RequestKind {
        match self {
            BackendResponse::Embed { .. } => RequestKind::Embed,
            BackendResponse::Qg { .. } => RequestKind::Qg,
            BackendResponse::Qa(_) => RequestKind::Qa,
        }
    }

    /// Checks that the response answers `request` and is internally consistent.
    pub fn check_against(&self, request: &BackendRequest) -> Result<(), BackendError> {
        if self.kind() != request.kind() {
            return Err(BackendError::Protocol(format!(
                "expected a {} response, got {}",
                request.kind(),
                self.kind()
            )));
        }
        if let (BackendResponse::Embed { embeddings }, BackendRequest::Embed { texts }) =
            (self, request)
        {
            if embeddings.len() != texts.len() {
                return Err(BackendError::Protocol(format!(
                    "{} texts embedded as {} sequences",
                    texts.len(),
                    embeddings.len()
                )));
            }
            let dim = embeddings.first().map(TokenEmbeddings::dim);
            if embeddings.iter().any(|e| Some(e.dim()) != dim) {
                return Err(BackendError::Protocol(
                    "embedding dimension differs between texts".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A model backend. Implementations must tolerate concurrent calls.
pub trait Backend: Send + Sync {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).call(request)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).call(request)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).call(request)
    }
}

fn unexpected(kind: RequestKind, got: &BackendResponse) -> BackendError {
    BackendError::Protocol(format!("expected a {kind} response, got {}", got.kind()))
}

/// Embeds one text.
pub fn embed_text(backend: &dyn Backend, text: &str) -> Result<TokenEmbeddings, BackendError> {
    let request = BackendRequest::embed([text]);
    request.validate()?;
    match backend.call(&request)? {
        BackendResponse::Embed { mut embeddings } if embeddings.len() == 1 => {
            Ok(embeddings.remove(0))
        }
        BackendResponse::Embed { embeddings } => Err(BackendError::Protocol(format!(
            "1 text embedded as {} sequences",
            embeddings.len()
        ))),
        other => Err(unexpected(RequestKind::Embed, &other)),
    }
}

pub fn generate_questions(
    backend: &dyn Backend,
    text: &str,
    max_questions: u32,
) -> Result<Vec<String>, BackendError> {
    let request = BackendRequest::qg(text, max_questions);
    request.validate()?;
    match backend.call(&request)? {
        BackendResponse::Qg { questions } => Ok(questions),
        other => Err(unexpected(RequestKind::Qg, &other)),
    }
}

/// Answers `question` against `context`. An empty context is unanswerable
/// without consulting the backend.
pub fn answer_question(
    backend: &dyn Backend,
    question: &str,
    context: &str,
) -> Result<QaAnswer, BackendError> {
    if context.trim().is_empty() {
        return Ok(QaAnswer::unanswerable());
    }
    let request = BackendRequest::qa(question, context);
    request.validate()?;
    match backend.call(&request)? {
        BackendResponse::Qa(answer) => Ok(answer),
        other => Err(unexpected(RequestKind::Qa, &other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_keys_and_collapses_whitespace() {
        let req = BackendRequest::qa("  Who  did it?\n", "ctx");
        assert_eq!(
            req.canonical_json(),
            r#"{"context":"ctx","kind":"qa","question":"Who did it?"}"#
        );
        let same = BackendRequest::qa("Who did it?", "ctx");
        assert_eq!(req.canonical_hash(), same.canonical_hash());
    }

    #[test]
    fn canonical_json_ignores_map_key_order() {
        let a: BackendRequest =
            serde_json::from_str(r#"{"kind":"qg","text":"t","max_questions":3}"#).unwrap();
        let b: BackendRequest =
            serde_json::from_str(r#"{"max_questions":3,"text":"t","kind":"qg"}"#).unwrap();
        assert_eq!(a.canonical_hash(), b.canonical_hash());
        assert_eq!(a.canonical_hash().len(), 64);
    }

    #[test]
    fn hash_is_stable_across_runs() {
        // frozen value guards against accidental changes to the canonical form
        let req = BackendRequest::embed(["a b"]);
        assert_eq!(req.canonical_json(), r#"{"kind":"embed","texts":["a b"]}"#);
        assert_eq!(
            req.canonical_hash(),
            hex::encode(Sha256::digest(br#"{"kind":"embed","texts":["a b"]}"#))
        );
    }

    #[test]
    fn validation_rejects_empty_payloads() {
        assert!(BackendRequest::embed(Vec::<String>::new())
            .validate()
            .is_err());
        assert!(BackendRequest::embed([" "]).validate().is_err());
        assert!(BackendRequest::qg("text", 0).validate().is_err());
        assert!(BackendRequest::qg("", 2).validate().is_err());
        assert!(BackendRequest::qa("", "ctx").validate().is_err());
        assert!(BackendRequest::qa("q?", "").validate().is_ok());
    }

    struct Panicking;
    impl Backend for Panicking {
        fn call(&self, _: &BackendRequest) -> Result<BackendResponse, BackendError> {
            panic!("backend must not be called");
        }
    }

    #[test]
    fn empty_context_is_unanswerable_without_backend() {
        let a = answer_question(&Panicking, "Who?", "  ").unwrap();
        assert!(a.unanswerable);
        assert_eq!(a.text(), None);
    }
}
