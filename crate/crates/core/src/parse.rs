//! Mapping raw completion text to labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ParseOutcome {
    Parsed { label: Label },
    Unparseable { raw: String },
}

impl ParseOutcome {
    pub fn label(&self) -> Option<Label> {
        match self {
            ParseOutcome::Parsed { label } => Some(*label),
            ParseOutcome::Unparseable { .. } => None,
        }
    }
}

/// How an unparseable completion enters scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackPolicy {
    /// Unparseable output aborts the run.
    Strict,
    /// Unparseable output is scored as the majority class, `Non-sarcastic`.
    #[default]
    DefaultMajority,
    /// Unparseable output is dropped from scoring and counted separately.
    Exclude,
}

impl FallbackPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            FallbackPolicy::Strict => "strict",
            FallbackPolicy::DefaultMajority => "default-majority",
            FallbackPolicy::Exclude => "exclude",
        }
    }
}

impl fmt::Display for FallbackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FallbackPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(FallbackPolicy::Strict),
            "default-majority" => Ok(FallbackPolicy::DefaultMajority),
            "exclude" => Ok(FallbackPolicy::Exclude),
            other => Err(format!(
                "unknown fallback policy {other:?} (expected strict, default-majority or exclude)"
            )),
        }
    }
}

/// Final scoring decision for one comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Label(Label),
    Excluded,
}

impl Decision {
    pub fn label(self) -> Option<Label> {
        match self {
            Decision::Label(l) => Some(l),
            Decision::Excluded => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Label(l) => l.as_str(),
            Decision::Excluded => "excluded",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("unparseable completion for comment {id:?}: {raw:?}")]
pub struct StrictParseError {
    pub id: String,
    pub raw: String,
}

const EDGE_PUNCTUATION: &[char] = &['.', ',', ':', ';', '!', '"', '\''];

/// Lowercases (ASCII only) and strips surrounding whitespace and punctuation.
pub fn normalize(raw: &str) -> String {
    raw.to_ascii_lowercase()
        .trim_matches(|c: char| c.is_whitespace() || EDGE_PUNCTUATION.contains(&c))
        .to_string()
}

/// Negative phrasings are checked before the bare keyword, since every one
/// of them contains `sarcastic` as a substring.
pub fn parse_label(raw: &str) -> ParseOutcome {
    let norm = normalize(raw);
    let label = if ["non-sarcastic", "non sarcastic", "not sarcastic"]
        .iter()
        .any(|neg| norm.contains(neg))
    {
        Some(Label::NonSarcastic)
    } else if norm.contains("sarcastic") {
        Some(Label::Sarcastic)
    } else {
        None
    };
    match label {
        Some(label) => ParseOutcome::Parsed { label },
        None => ParseOutcome::Unparseable { raw: raw.to_string() },
    }
}

pub fn apply_fallback(outcome: &ParseOutcome, policy: FallbackPolicy, id: &str) -> Result<Decision, StrictParseError> {
    match (outcome, policy) {
        (ParseOutcome::Parsed { label }, _) => Ok(Decision::Label(*label)),
        (ParseOutcome::Unparseable { .. }, FallbackPolicy::DefaultMajority) => Ok(Decision::Label(Label::NonSarcastic)),
        (ParseOutcome::Unparseable { .. }, FallbackPolicy::Exclude) => Ok(Decision::Excluded),
        (ParseOutcome::Unparseable { raw }, FallbackPolicy::Strict) => Err(StrictParseError {
            id: id.to_string(),
            raw: raw.clone(),
        }),
    }
}
