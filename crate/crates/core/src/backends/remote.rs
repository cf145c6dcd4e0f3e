//! HTTP client for the inference service.
//!
//! Wire protocol, JSON over POST:
//!
//! | path     | body                           | reply                                             |
//! |----------|--------------------------------|---------------------------------------------------|
//! | `/embed` | `{texts: [str]}`               | `{tokens: [[str]], vectors: [[[num]]], dim: int}` |
//! | `/qg`    | `{text: str, max_questions: n}`| `{questions: [str]}`                              |
//! | `/qa`    | `{question: str, context: str}`| `{answer: str, unanswerable: bool}`               |
//!
//! Rejections come back as status 400 with `{error: str}`.

use std::thread;
use std::time::Duration;

use serde::Deserialize;
use tracing::warn;
use url::Url;

use super::{Backend, BackendError, BackendRequest, BackendResponse, QaAnswer};
use crate::embed::TokenEmbeddings;

/// Raw HTTP reply.
#[derive(Debug, Clone)]
pub struct HttpReply {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone)]
pub enum TransportError {
    Timeout,
    Failed(String),
}

/// Sends one JSON POST. Abstracted so retry behaviour is testable without a network.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &Url,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportError>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, BackendError> {
        let client =
            reqwest::blocking::Client::builder()
                .build()
                .map_err(|e| BackendError::Transport {
                    attempts: 0,
                    message: e.to_string(),
                })?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &Url,
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportError> {
        let response = self
            .client
            .post(url.clone())
            .header("content-type", "application/json")
            .body(body.to_string())
            .timeout(timeout)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    TransportError::Timeout
                } else {
                    TransportError::Failed(e.to_string())
                }
            })?;
        let status = response.status().as_u16();
        let body = response.bytes().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Failed(e.to_string())
            }
        })?;
        Ok(HttpReply {
            status,
            body: body.to_vec(),
        })
    }
}

/// Exponential backoff: `base_delay * factor^attempt` between attempts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub factor: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(100),
            factor: 2,
        }
    }
}

impl RetryPolicy {
    pub fn delay_before_retry(&self, retry: u32) -> Duration {
        self.base_delay * self.factor.saturating_pow(retry)
    }
}

pub struct RemoteBackend {
    endpoint: Url,
    transport: Box<dyn Transport>,
    timeout: Duration,
    retry: RetryPolicy,
}

impl RemoteBackend {
    pub fn new(endpoint: &str) -> Result<Self, BackendError> {
        Ok(Self::with_transport(
            parse_endpoint(endpoint)?,
            Box::new(HttpTransport::new()?),
        ))
    }

    pub fn with_transport(endpoint: Url, transport: Box<dyn Transport>) -> Self {
        RemoteBackend {
            endpoint,
            transport,
            timeout: Duration::from_secs(30),
            retry: RetryPolicy::default(),
        }
    }

    pub fn timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn endpoint(&self) -> &Url {
        &self.endpoint
    }

    fn url_for(&self, request: &BackendRequest) -> Result<Url, BackendError> {
        self.endpoint
            .join(request.kind().path())
            .map_err(|e| BackendError::InvalidRequest(format!("bad endpoint: {e}")))
    }
}

fn parse_endpoint(endpoint: &str) -> Result<Url, BackendError> {
    let mut url = Url::parse(endpoint)
        .map_err(|e| BackendError::InvalidRequest(format!("bad endpoint `{endpoint}`: {e}")))?;
    if !url.path().ends_with('/') {
        let path = format!("{}/", url.path());
        url.set_path(&path);
    }
    Ok(url)
}

impl Backend for RemoteBackend {
    fn call(&self, request: &BackendRequest) -> Result<BackendResponse, BackendError> {
        request.validate()?;
        let url = self.url_for(request)?;
        let body = request.wire_body().to_string();
        let mut attempts = 0;
        loop {
            attempts += 1;
            let failure = match self.transport.post_json(&url, &body, self.timeout) {
                Ok(reply) if reply.status < 400 => return decode_reply(request, &reply.body),
                Ok(reply) if reply.status < 500 => {
                    return Err(BackendError::Protocol(rejection_message(&reply)));
                }
                Ok(reply) => BackendError::Transport {
                    attempts,
                    message: format!("server error {}", reply.status),
                },
                Err(TransportError::Timeout) => BackendError::Timeout { attempts },
                Err(TransportError::Failed(message)) => {
                    BackendError::Transport { attempts, message }
                }
            };
            if attempts > self.retry.max_retries {
                return Err(failure);
            }
            let delay = self.retry.delay_before_retry(attempts - 1);
            warn!(%url, attempts, ?delay, error = %failure, "retrying backend call");
            thread::sleep(delay);
        }
    }
}

/// One-shot call with an explicit timeout and retry budget.
pub fn remote_call(
    endpoint: &str,
    request: &BackendRequest,
    timeout: Duration,
    retries: u32,
) -> Result<BackendResponse, BackendError> {
    RemoteBackend::new(endpoint)?
        .timeout(timeout)
        .retry(RetryPolicy {
            max_retries: retries,
            ..RetryPolicy::default()
        })
        .call(request)
}

fn rejection_message(reply: &HttpReply) -> String {
    #[derive(Deserialize)]
    struct Rejection {
        error: String,
    }
    match serde_json::from_slice::<Rejection>(&reply.body) {
        Ok(r) => format!("rejected with status {}: {}", reply.status, r.error),
        Err(_) => format!("rejected with status {}", reply.status),
    }
}

#[derive(Deserialize)]
struct EmbedReply {
    tokens: Vec<Vec<String>>,
    vectors: Vec<Vec<Vec<f64>>>,
    dim: usize,
}

#[derive(Deserialize)]
struct QgReply {
    questions: Vec<String>,
}

#[derive(Deserialize)]
struct QaReply {
    answer: String,
    unanswerable: bool,
}

fn malformed(kind: &str, e: serde_json::Error) -> BackendError {
    BackendError::Protocol(format!("malformed {kind} reply: {e}"))
}

/// Decodes and validates a success body for `request`.
pub fn decode_reply(
    request: &BackendRequest,
    body: &[u8],
) -> Result<BackendResponse, BackendError> {
    let response = match request {
        BackendRequest::Embed { .. } => {
            let reply: EmbedReply =
                serde_json::from_slice(body).map_err(|e| malformed("embed", e))?;
            if reply.tokens.len() != reply.vectors.len() {
                return Err(BackendError::Protocol(format!(
                    "{} token lists but {} vector lists",
                    reply.tokens.len(),
                    reply.vectors.len()
                )));
            }
            let mut embeddings = Vec::with_capacity(reply.tokens.len());
            for (i, (tokens, vectors)) in reply.tokens.into_iter().zip(reply.vectors).enumerate() {
                if vectors.iter().any(|v| v.len() != reply.dim) {
                    return Err(BackendError::Protocol(format!(
                        "text {i}: vector length differs from declared dim {}",
                        reply.dim
                    )));
                }
                let emb = TokenEmbeddings::new(tokens, vectors)
                    .map_err(|e| BackendError::Protocol(format!("text {i}: {e}")))?;
                embeddings.push(emb);
            }
            BackendResponse::Embed { embeddings }
        }
        BackendRequest::Qg { .. } => {
            let reply: QgReply = serde_json::from_slice(body).map_err(|e| malformed("qg", e))?;
            BackendResponse::Qg {
                questions: reply.questions,
            }
        }
        BackendRequest::Qa { .. } => {
            let reply: QaReply = serde_json::from_slice(body).map_err(|e| malformed("qa", e))?;
            BackendResponse::Qa(QaAnswer {
                answer: reply.answer,
                unanswerable: reply.unanswerable,
            })
        }
    };
    response.check_against(request)?;
    Ok(response)
}
