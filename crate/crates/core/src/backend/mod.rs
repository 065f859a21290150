//! Chat-completion backends.
//!
//! [`ChatBackend`] is implemented by the HTTP client in [`remote`] and the
//! offline rule-based stand-in in [`mock`]. [`cache`] wraps any backend with
//! a persistent digest-keyed replay store.

pub mod cache;
pub mod mock;
pub mod remote;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{cached_complete, ResponseCache};
pub use mock::{mock_complete, MockBackend, MockConfig};
pub use remote::{RateLimit, RemoteBackend, RemoteConfig, RetryPolicy};

/// Output budget when none is configured; a label is a couple of tokens.
pub const DEFAULT_MAX_TOKENS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub messages: Vec<Message>,
}

impl ChatRequest {
    /// Zero-shot request: the rendered prompt as the only (user) message.
    pub fn zero_shot(
        model_id: impl Into<String>,
        temperature: f64,
        max_tokens: u32,
        prompt: impl Into<String>,
    ) -> Self {
        Self {
            model_id: model_id.into(),
            temperature,
            max_tokens,
            messages: vec![Message {
                role: Role::User,
                content: prompt.into(),
            }],
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest("messages must not be empty".into()));
        }
        let users = self.messages.iter().filter(|m| m.role == Role::User).count();
        if users != 1 {
            return Err(BackendError::InvalidRequest(format!(
                "expected exactly one user message, found {users}"
            )));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }

    pub fn user_content(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    /// Hex SHA-256 over the canonical JSON of every output-affecting field.
    ///
    /// Field order is fixed by the struct declaration and floats are printed
    /// in shortest round-trip form, so the digest is stable across runs.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            model_id: &'a str,
            temperature: f64,
            max_tokens: u32,
            messages: &'a [Message],
        }
        let canonical = Canonical {
            model_id: &self.model_id,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            messages: &self.messages,
        };
        let bytes = serde_json::to_vec(&canonical).expect("request serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: String,
    pub latency_ms: u64,
    pub attempt_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub request: ChatRequest,
    pub response: ChatResponse,
    pub cache_hit: bool,
    pub request_digest: String,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("API key environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("authentication rejected (HTTP {status}) after {attempts} attempt(s)")]
    Authentication { status: u16, attempts: u32 },
    #[error("gave up after {attempts} attempt(s): {last_error}")]
    RetriesExhausted { attempts: u32, last_error: String },
    #[error("request rejected (HTTP {status}) after {attempts} attempt(s): {body}")]
    Rejected { status: u16, attempts: u32, body: String },
    #[error("malformed response after {attempts} attempt(s): {message}")]
    Protocol { attempts: u32, message: String },
    #[error("cache error: {0}")]
    Cache(String),
}

impl BackendError {
    /// Number of requests actually sent before the error surfaced.
    pub fn attempt_count(&self) -> u32 {
        match self {
            BackendError::Authentication { attempts, .. }
            | BackendError::RetriesExhausted { attempts, .. }
            | BackendError::Rejected { attempts, .. }
            | BackendError::Protocol { attempts, .. } => *attempts,
            BackendError::InvalidRequest(_) | BackendError::MissingApiKey(_) | BackendError::Cache(_) => 0,
        }
    }
}

pub trait ChatBackend: Send + Sync {
    /// Short identifier recorded in result metadata.
    fn name(&self) -> &str;

    /// Sends one request. Implementations may assume it has been validated.
    fn send(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError>;
}

/// Validates `req` and forwards it to `backend`.
pub fn complete(backend: &dyn ChatBackend, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
    req.validate()?;
    backend.send(req)
}
