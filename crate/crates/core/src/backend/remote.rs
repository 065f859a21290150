//! Blocking client for OpenAI-compatible `chat/completions` endpoints.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse, Message};

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

/// Exponential backoff with full jitter: before retry `k` (1-based) the
/// client sleeps a uniform random duration in `[0, min(max_delay, base * factor^(k-1))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: f64,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            max_delay: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    /// Upper bound of the jitter window before retry number `retry` (1-based).
    pub fn backoff_cap(&self, retry: u32) -> Duration {
        let exp = self.factor.powi(retry.saturating_sub(1) as i32);
        let secs = (self.base_delay.as_secs_f64() * exp).min(self.max_delay.as_secs_f64());
        Duration::from_secs_f64(secs.max(0.0))
    }

    fn jittered(&self, retry: u32) -> Duration {
        let cap = self.backoff_cap(retry).as_secs_f64();
        if cap <= 0.0 {
            return Duration::ZERO;
        }
        Duration::from_secs_f64(rand::thread_rng().gen_range(0.0..=cap))
    }
}

/// Client-side throttling: at most `max_in_flight` concurrent requests and
/// a token bucket refilled at `requests_per_second` (burst of one second).
/// A non-positive or non-finite rate disables the bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLimit {
    pub max_in_flight: usize,
    pub requests_per_second: f64,
}

impl Default for RateLimit {
    fn default() -> Self {
        Self {
            max_in_flight: 4,
            requests_per_second: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key_env: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub rate_limit: RateLimit,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: DEFAULT_ENDPOINT.into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            timeout: Duration::from_secs(60),
            retry: RetryPolicy::default(),
            rate_limit: RateLimit::default(),
        }
    }
}

struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    fn new(rate: f64) -> Option<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return None;
        }
        let capacity = rate.max(1.0);
        Some(Self {
            rate,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        })
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().expect("bucket lock");
                let now = Instant::now();
                let (tokens, last) = *state;
                let tokens = (tokens + now.duration_since(last).as_secs_f64() * self.rate).min(self.capacity);
                if tokens >= 1.0 {
                    *state = (tokens - 1.0, now);
                    return;
                }
                *state = (tokens, now);
                (1.0 - tokens) / self.rate
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().expect("in-flight lock");
        while *active >= self.limit {
            active = self.freed.wait(active).expect("in-flight lock");
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Builds the JSON body sent to the endpoint.
pub fn wire_body(req: &ChatRequest) -> serde_json::Value {
    serde_json::to_value(WireRequest {
        model: &req.model_id,
        messages: &req.messages,
        temperature: req.temperature,
        max_tokens: req.max_tokens,
    })
    .expect("wire request serializes")
}

/// Extracts `(content, finish_reason)` from a response body.
pub fn parse_wire_response(body: &str) -> Result<(String, String), String> {
    let parsed: WireResponse = serde_json::from_str(body).map_err(|e| format!("invalid JSON: {e}"))?;
    let choice = parsed.choices.into_iter().next().ok_or("response has no choices")?;
    let content = choice.message.content.ok_or("choices[0].message.content is missing")?;
    Ok((content, choice.finish_reason.unwrap_or_default()))
}

enum Fatal {
    Auth(u16),
    Rejected(u16, String),
    Protocol(String),
}

impl Fatal {
    fn into_error(self, attempts: u32) -> BackendError {
        match self {
            Fatal::Auth(status) => BackendError::Authentication { status, attempts },
            Fatal::Rejected(status, body) => BackendError::Rejected { status, attempts, body },
            Fatal::Protocol(message) => BackendError::Protocol { attempts, message },
        }
    }
}

enum Attempt {
    Done(String, String),
    Retry(String),
    Fatal(Fatal),
}

pub struct RemoteBackend {
    config: RemoteConfig,
    api_key: String,
    agent: ureq::Agent,
    bucket: Option<TokenBucket>,
    in_flight: InFlight,
}

impl std::fmt::Debug for RemoteBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteBackend")
            .field("endpoint", &self.config.endpoint)
            .finish_non_exhaustive()
    }
}

impl RemoteBackend {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: RemoteConfig) -> Result<Self, BackendError> {
        match std::env::var(&config.api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(Self::with_api_key(config, key)),
            _ => Err(BackendError::MissingApiKey(config.api_key_env.clone())),
        }
    }

    pub fn with_api_key(config: RemoteConfig, api_key: impl Into<String>) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Self {
            bucket: TokenBucket::new(config.rate_limit.requests_per_second),
            in_flight: InFlight::new(config.rate_limit.max_in_flight),
            api_key: api_key.into(),
            agent,
            config,
        }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn attempt(&self, body: &serde_json::Value) -> Attempt {
        if let Some(bucket) = &self.bucket {
            bucket.acquire();
        }
        let _permit = self.in_flight.acquire();
        let result = self
            .agent
            .post(&self.config.endpoint)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        match result {
            Ok(resp) => match resp.into_string() {
                Ok(text) => match parse_wire_response(&text) {
                    Ok((content, finish)) => Attempt::Done(content, finish),
                    Err(message) => Attempt::Fatal(Fatal::Protocol(message)),
                },
                Err(e) => Attempt::Retry(format!("reading response body: {e}")),
            },
            Err(ureq::Error::Status(status, resp)) => {
                let text = resp.into_string().unwrap_or_default();
                match status {
                    401 | 403 => Attempt::Fatal(Fatal::Auth(status)),
                    408 | 409 | 429 | 500..=599 => Attempt::Retry(format!("HTTP {status}: {text}")),
                    _ => Attempt::Fatal(Fatal::Rejected(status, text)),
                }
            }
            Err(ureq::Error::Transport(t)) => Attempt::Retry(format!("transport: {t}")),
        }
    }
}

impl ChatBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn send(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let body = wire_body(req);
        let started = Instant::now();
        let max_attempts = self.config.retry.max_attempts.max(1);
        let mut last_error = String::new();
        for attempt in 1..=max_attempts {
            if attempt > 1 {
                let delay = self.config.retry.jittered(attempt - 1);
                debug!("retry {attempt}/{max_attempts} in {delay:?}: {last_error}");
                std::thread::sleep(delay);
            }
            match self.attempt(&body) {
                Attempt::Done(content, finish_reason) => {
                    return Ok(ChatResponse {
                        content,
                        finish_reason,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempt_count: attempt,
                    })
                }
                Attempt::Retry(message) => {
                    warn!("attempt {attempt} failed: {message}");
                    last_error = message;
                }
                Attempt::Fatal(fatal) => return Err(fatal.into_error(attempt)),
            }
        }
        Err(BackendError::RetriesExhausted {
            attempts: max_attempts,
            last_error,
        })
    }
}
