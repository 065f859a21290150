//! Deterministic offline backend.
//!
//! The reply is a pure function of the user-message content, the seed, the
//! noise rate and the lexicon. Rules, first match wins:
//!
//! 1. content contains `??`, `...` or `!!` → `Sarcastic`
//! 2. content contains a lexicon token (ASCII case-insensitive, tokens split
//!    on non-alphanumeric characters) → `Sarcastic`
//! 3. the seeded hash of the content falls below `noise_rate` → one of
//!    [`DECORATIONS`], picked by a second hash byte
//! 4. otherwise → `Non-sarcastic`
//!
//! Temperature is ignored.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, ChatBackend, ChatRequest, ChatResponse};

/// Noisy outputs for rule 3. The first two still parse to a label, the last
/// two do not.
pub const DECORATIONS: [&str; 4] = [
    "It is Sarcastic.",
    "The comment is Non-sarcastic.",
    "I cannot determine this.",
    "Hmm, hard to say without more context.",
];

const SARCASM_MARKERS: [&str; 3] = ["??", "...", "!!"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockConfig {
    pub seed: u64,
    pub noise_rate: f64,
    pub lexicon: Vec<String>,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            noise_rate: 0.0,
            lexicon: ["wow", "bravo", "genius", "obviously", "sure"]
                .into_iter()
                .map(String::from)
                .collect(),
        }
    }
}

/// Uniform value in `[0, 1)` and a selector byte, both derived from the seeded hash.
fn noise_draw(seed: u64, content: &str) -> (f64, u8) {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(content.as_bytes());
    let out = h.finalize();
    let bits = u64::from_le_bytes(out[..8].try_into().expect("8 bytes"));
    ((bits >> 11) as f64 / (1u64 << 53) as f64, out[8])
}

fn mock_reply(cfg: &MockConfig, lexicon: &HashSet<String>, content: &str) -> &'static str {
    if SARCASM_MARKERS.iter().any(|m| content.contains(m)) {
        return "Sarcastic";
    }
    if content
        .split(|c: char| !c.is_alphanumeric())
        .any(|tok| !tok.is_empty() && lexicon.contains(&tok.to_ascii_lowercase()))
    {
        return "Sarcastic";
    }
    let (u, selector) = noise_draw(cfg.seed, content);
    if u < cfg.noise_rate {
        return DECORATIONS[selector as usize % DECORATIONS.len()];
    }
    "Non-sarcastic"
}

fn lexicon_set(cfg: &MockConfig) -> HashSet<String> {
    cfg.lexicon.iter().map(|w| w.to_ascii_lowercase()).collect()
}

/// Stateless form of the mock rule table.
pub fn mock_complete(cfg: &MockConfig, req: &ChatRequest) -> ChatResponse {
    ChatResponse {
        content: mock_reply(cfg, &lexicon_set(cfg), req.user_content()).to_string(),
        finish_reason: "stop".into(),
        latency_ms: 0,
        attempt_count: 1,
    }
}

/// [`ChatBackend`] over [`mock_complete`] that counts how often it is called.
#[derive(Debug)]
pub struct MockBackend {
    config: MockConfig,
    lexicon: HashSet<String>,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(config: MockConfig) -> Self {
        Self {
            lexicon: lexicon_set(&config),
            config,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn send(&self, req: &ChatRequest) -> Result<ChatResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(ChatResponse {
            content: mock_reply(&self.config, &self.lexicon, req.user_content()).to_string(),
            finish_reason: "stop".into(),
            latency_ms: 0,
            attempt_count: 1,
        })
    }
}
