//! Experiment configuration, read from TOML.
//!
//! ```toml
//! dataset_path = "synthetic_100.tsv"
//! language_pair = "tamil-english"
//! model_id = "gpt-3.5-turbo"
//! temperatures = [0.7, 0.8, 0.9]
//! cache_dir = "cache"
//! output_dir = "out"
//!
//! [prompt]
//! instruction = "Is this sarcastic? <Text>"
//!
//! [parse]
//! fallback = "exclude"
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backend::{MockConfig, RateLimit, RemoteConfig, RetryPolicy, DEFAULT_MAX_TOKENS};
use crate::corpus::LanguagePair;
use crate::parse::FallbackPolicy;
use crate::prompt::{default_template, PromptTemplate};

use super::RunError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSection {
    /// Custom instruction with exactly one `<Text>` placeholder.
    pub instruction: Option<String>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseSection {
    #[serde(default)]
    pub fallback: FallbackPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteSection {
    pub endpoint: String,
    pub api_key_env: String,
    pub timeout_ms: u64,
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_factor: f64,
    pub backoff_max_ms: u64,
}

impl Default for RemoteSection {
    fn default() -> Self {
        let d = RemoteConfig::default();
        Self {
            endpoint: d.endpoint,
            api_key_env: d.api_key_env,
            timeout_ms: d.timeout.as_millis() as u64,
            max_attempts: d.retry.max_attempts,
            backoff_base_ms: d.retry.base_delay.as_millis() as u64,
            backoff_factor: d.retry.factor,
            backoff_max_ms: d.retry.max_delay.as_millis() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockSection {
    pub noise_rate: f64,
    pub lexicon: Vec<String>,
}

impl Default for MockSection {
    fn default() -> Self {
        let d = MockConfig::default();
        Self {
            noise_rate: d.noise_rate,
            lexicon: d.lexicon,
        }
    }
}

fn default_model() -> String {
    "gpt-3.5-turbo".into()
}

fn default_temperatures() -> Vec<f64> {
    vec![0.7, 0.8, 0.9]
}

fn default_max_tokens() -> u32 {
    DEFAULT_MAX_TOKENS
}

fn default_concurrency() -> usize {
    4
}

fn default_rate_limit() -> f64 {
    3.0
}

fn default_cache_dir() -> String {
    "cache".into()
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_path: String,
    pub language_pair: LanguagePair,
    #[serde(default = "default_model")]
    pub model_id: String,
    #[serde(default = "default_temperatures")]
    pub temperatures: Vec<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_concurrency")]
    pub concurrency_bound: usize,
    /// Requests per second for the remote backend; 0 disables throttling.
    #[serde(default = "default_rate_limit")]
    pub rate_limit: f64,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Check the loaded dataset has exactly this many comments.
    #[serde(default)]
    pub expected_count: Option<usize>,
    /// Score a stratified sample of this size instead of the whole dataset.
    #[serde(default)]
    pub sample: Option<usize>,
    #[serde(default)]
    pub prompt: PromptSection,
    #[serde(default)]
    pub parse: ParseSection,
    #[serde(default)]
    pub remote: RemoteSection,
    #[serde(default)]
    pub mock: MockSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything but the dataset.
    pub fn new(dataset_path: impl Into<String>, language_pair: LanguagePair) -> Self {
        Self {
            dataset_path: dataset_path.into(),
            language_pair,
            model_id: default_model(),
            temperatures: default_temperatures(),
            max_tokens: default_max_tokens(),
            concurrency_bound: default_concurrency(),
            rate_limit: default_rate_limit(),
            cache_dir: default_cache_dir(),
            seed: 0,
            output_dir: default_output_dir(),
            expected_count: None,
            sample: None,
            prompt: PromptSection::default(),
            parse: ParseSection::default(),
            remote: RemoteSection::default(),
            mock: MockSection::default(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, RunError> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base).map_err(|e| match e {
            RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let err = |m: String| Err(RunError::Config(m));
        if self.temperatures.is_empty() {
            return err("temperatures must not be empty".into());
        }
        if let Some(t) = self.temperatures.iter().find(|t| !(0.0..=2.0).contains(*t)) {
            return err(format!("temperature {t} outside [0, 2]"));
        }
        if self.concurrency_bound == 0 {
            return err("concurrency_bound must be at least 1".into());
        }
        if self.max_tokens == 0 {
            return err("max_tokens must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.mock.noise_rate) {
            return err(format!("mock.noise_rate {} outside [0, 1]", self.mock.noise_rate));
        }
        if self.rate_limit.is_nan() || self.rate_limit < 0.0 {
            return err(format!("rate_limit {} must be non-negative", self.rate_limit));
        }
        self.template().map(|_| ()).map_err(|e| RunError::Config(e.to_string()))
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.resolve(&self.dataset_path)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.resolve(&self.cache_dir)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn fallback(&self) -> FallbackPolicy {
        self.parse.fallback
    }

    pub fn template(&self) -> Result<PromptTemplate, crate::prompt::PromptError> {
        match &self.prompt.instruction {
            Some(instruction) => PromptTemplate::new(
                self.prompt.name.clone().unwrap_or_else(|| "custom".into()),
                self.language_pair,
                instruction.clone(),
            ),
            None => Ok(default_template(self.language_pair)),
        }
    }

    pub fn mock_config(&self) -> MockConfig {
        MockConfig {
            seed: self.seed,
            noise_rate: self.mock.noise_rate,
            lexicon: self.mock.lexicon.clone(),
        }
    }

    pub fn remote_config(&self) -> RemoteConfig {
        let r = &self.remote;
        RemoteConfig {
            endpoint: r.endpoint.clone(),
            api_key_env: r.api_key_env.clone(),
            timeout: Duration::from_millis(r.timeout_ms),
            retry: RetryPolicy {
                max_attempts: r.max_attempts,
                base_delay: Duration::from_millis(r.backoff_base_ms),
                factor: r.backoff_factor,
                max_delay: Duration::from_millis(r.backoff_max_ms),
            },
            rate_limit: RateLimit {
                max_in_flight: self.concurrency_bound,
                requests_per_second: self.rate_limit,
            },
        }
    }
}
