//! Experiment orchestration: dataset → prompts → backend → labels → report.
//!
//! Backend calls fan out over a bounded worker pool; everything after the
//! join (parsing, fallback, tabulation) walks the dataset in index order, so
//! outputs do not depend on completion order or worker count. Partial
//! progress lives only in the replay cache: rerunning an interrupted
//! experiment replays completed requests from disk.

mod config;
mod score;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::cache::write_atomic;
use crate::backend::{cached_complete, BackendError, ChatBackend, ChatExchange, ChatRequest, ResponseCache};
use crate::corpus::{self, escape_field, CorpusError, Dataset, Label, LanguagePair, ValidationIssue};
use crate::metrics::{self, ClassificationReport, ConfusionMatrix};
use crate::parse::{apply_fallback, parse_label, Decision, FallbackPolicy, ParseOutcome, StrictParseError};
use crate::prompt::PromptError;

pub use config::{ExperimentConfig, MockSection, ParseSection, PromptSection, RemoteSection};
pub use score::{load_predictions, score_predictions, Prediction, ScoreError, ScoreOutcome};

pub const RESULT_FILE: &str = "result.json";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("dataset failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<ValidationIssue>),
    #[error("comment {id:?}: {source}")]
    Prompt {
        id: String,
        #[source]
        source: PromptError,
    },
    #[error("backend failed on comment {id:?} ({completed} of {total} requests completed and cached): {source}")]
    Backend {
        id: String,
        completed: usize,
        total: usize,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Cache(BackendError),
    #[error(transparent)]
    Parse(#[from] StrictParseError),
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One scored comment, in dataset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub gold: Option<Label>,
    /// SHA-256 of the rendered prompt.
    pub prompt_digest: String,
    pub request_digest: String,
    pub raw: String,
    pub outcome: ParseOutcome,
    #[serde(rename = "final")]
    pub decision: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub parsed: usize,
    pub unparseable: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source_path: String,
    pub language_pair: LanguagePair,
    pub size: usize,
    pub labeled: bool,
}

/// Run metadata that legitimately differs between otherwise identical runs.
/// Excluded from [`ExperimentResult::comparison_digest`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub started_at_unix_ms: u64,
    pub finished_at_unix_ms: u64,
    pub duration_ms: u64,
    pub cache_hits: usize,
    pub backend_calls: usize,
    pub total_attempts: u64,
    pub total_latency_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cache_warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub backend: String,
    pub temperature: f64,
    pub template_name: String,
    pub template_instruction: String,
    pub fallback_policy: FallbackPolicy,
    pub dataset: DatasetInfo,
    pub counts: Counts,
    pub confusion: Option<ConfusionMatrix>,
    pub report: Option<ClassificationReport>,
    pub records: Vec<PredictionRecord>,
    /// SHA-256 of this result with `provenance` and this field removed.
    pub content_digest: String,
    pub provenance: Provenance,
}

impl ExperimentResult {
    /// Digest over everything except timestamps, durations and cache
    /// statistics.
    pub fn comparison_digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("result serializes");
        let obj = value.as_object_mut().expect("result is an object");
        obj.remove("provenance");
        obj.remove("content_digest");
        hex::encode(Sha256::digest(serde_json::to_vec(&value).expect("value serializes")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    /// `id, gold, raw, parsed, final` with fields escaped as in corpus files.
    pub fn predictions_tsv(&self) -> String {
        let mut out = String::from("id\tgold\traw\tparsed\tfinal\n");
        for r in &self.records {
            let parsed = r.outcome.label().map(Label::as_str).unwrap_or("unparseable");
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                escape_field(&r.id),
                r.gold.map(Label::as_str).unwrap_or(""),
                escape_field(&r.raw),
                parsed,
                r.decision.as_str()
            );
        }
        out
    }

    pub fn report_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset      : {}", self.dataset.source_path);
        let _ = writeln!(out, "language pair: {}", self.dataset.language_pair);
        let _ = writeln!(out, "model        : {} ({})", self.config.model_id, self.backend);
        let _ = writeln!(out, "temperature  : {}", self.temperature);
        let _ = writeln!(out, "fallback     : {}", self.fallback_policy);
        let c = &self.counts;
        let _ = writeln!(
            out,
            "comments     : {} (parsed {}, unparseable {}, excluded {})",
            c.total, c.parsed, c.unparseable, c.excluded
        );
        out.push('\n');
        match &self.report {
            Some(report) => {
                let _ = writeln!(out, "{report}");
            }
            None if !self.dataset.labeled => out.push_str("no gold labels: classification report not available\n"),
            None => out.push_str("every comment was excluded: classification report not available\n"),
        }
        out
    }

    /// Writes `result.json`, `predictions.tsv` and `report.txt` atomically.
    pub fn write_to(&self, dir: &Path) -> Result<(), RunError> {
        let io = |path: PathBuf| move |source| RunError::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, content) in [
            (PREDICTIONS_FILE, self.predictions_tsv()),
            (REPORT_FILE, self.report_text()),
            (RESULT_FILE, self.to_json()),
        ] {
            let path = dir.join(name);
            write_atomic(&path, content.as_bytes()).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

fn unix_ms(t: SystemTime) -> u64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Loads, validates and optionally samples the configured dataset.
pub fn prepare_dataset(cfg: &ExperimentConfig) -> Result<Dataset, RunError> {
    let dataset = corpus::load_dataset(cfg.dataset_path(), cfg.language_pair)?;
    let summary = corpus::validate_dataset(&dataset, cfg.expected_count);
    if !summary.is_clean() {
        return Err(RunError::Validation(summary.issues));
    }
    match cfg.sample {
        Some(n) => Ok(corpus::sample(&dataset, n, cfg.seed)?),
        None => Ok(dataset),
    }
}

/// Issues every request on at most `workers` threads and returns the
/// exchanges in request order. Stops handing out work after the first error.
fn fan_out(
    requests: &[ChatRequest],
    workers: usize,
    cache: &ResponseCache,
    backend: &dyn ChatBackend,
) -> Vec<Option<Result<ChatExchange, BackendError>>> {
    let slots: Vec<Mutex<Option<Result<ChatExchange, BackendError>>>> =
        requests.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, requests.len().max(1)) {
            scope.spawn(|| loop {
                if failed.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(req) = requests.get(i) else { break };
                let outcome = cached_complete(cache, backend, req);
                if outcome.is_err() {
                    failed.store(true, Ordering::SeqCst);
                }
                *slots[i].lock().expect("slot lock") = Some(outcome);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().expect("slot lock")).collect()
}

/// Runs one temperature and writes the outputs to `cfg.output_dir()`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    temperature: f64,
    backend: &dyn ChatBackend,
) -> Result<ExperimentResult, RunError> {
    run_into(cfg, temperature, backend, &cfg.output_dir())
}

/// Directory name used by [`sweep`] for one temperature.
pub fn temperature_dir_name(temperature: f64) -> String {
    format!("temperature-{temperature}")
}

/// Runs every configured temperature in order, each into its own
/// subdirectory of the output directory.
///
/// On failure, the results completed before the failing temperature are
/// returned alongside the error.
pub fn sweep(cfg: &ExperimentConfig, backend: &dyn ChatBackend) -> Result<Vec<ExperimentResult>, SweepError> {
    if let Err(error) = cfg.validate() {
        return Err(SweepError {
            completed: Vec::new(),
            error,
        });
    }
    let mut completed = Vec::with_capacity(cfg.temperatures.len());
    for &t in &cfg.temperatures {
        let dir = cfg.output_dir().join(temperature_dir_name(t));
        match run_into(cfg, t, backend, &dir) {
            Ok(r) => completed.push(r),
            Err(error) => return Err(SweepError { completed, error }),
        }
    }
    Ok(completed)
}

#[derive(Debug, Error)]
#[error("{error} ({} temperature(s) completed before the failure)", completed.len())]
pub struct SweepError {
    pub completed: Vec<ExperimentResult>,
    #[source]
    pub error: RunError,
}

pub fn run_into(
    cfg: &ExperimentConfig,
    temperature: f64,
    backend: &dyn ChatBackend,
    out_dir: &Path,
) -> Result<ExperimentResult, RunError> {
    cfg.validate()?;
    if !(0.0..=2.0).contains(&temperature) {
        return Err(RunError::Config(format!("temperature {temperature} outside [0, 2]")));
    }
    let started_at = SystemTime::now();
    let clock = Instant::now();

    let dataset = prepare_dataset(cfg)?;
    let template = cfg.template().map_err(|e| RunError::Config(e.to_string()))?;
    let policy = cfg.fallback();

    let mut requests = Vec::with_capacity(dataset.len());
    let mut prompt_digests = Vec::with_capacity(dataset.len());
    for c in &dataset.comments {
        let prompt = template.render(&c.text).map_err(|source| RunError::Prompt {
            id: c.id.clone(),
            source,
        })?;
        prompt_digests.push(hex::encode(Sha256::digest(prompt.as_bytes())));
        requests.push(ChatRequest::zero_shot(
            &cfg.model_id,
            temperature,
            cfg.max_tokens,
            prompt,
        ));
    }

    let cache = ResponseCache::open(cfg.cache_dir()).map_err(RunError::Cache)?;
    let outcomes = fan_out(&requests, cfg.concurrency_bound, &cache, backend);

    let completed = outcomes.iter().filter(|o| matches!(o, Some(Ok(_)))).count();
    let mut exchanges = Vec::with_capacity(outcomes.len());
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Some(Ok(ex)) => exchanges.push(ex),
            Some(Err(source)) => {
                return Err(RunError::Backend {
                    id: dataset.comments[i].id.clone(),
                    completed,
                    total: requests.len(),
                    source,
                })
            }
            // skipped after an earlier failure; that failure is reported first
            None => unreachable!("request {i} skipped without a recorded failure"),
        }
    }

    let mut counts = Counts {
        total: dataset.len(),
        ..Counts::default()
    };
    let mut records = Vec::with_capacity(dataset.len());
    for ((comment, exchange), prompt_digest) in dataset.comments.iter().zip(&exchanges).zip(prompt_digests) {
        let raw = exchange.response.content.clone();
        let outcome = parse_label(&raw);
        let decision = apply_fallback(&outcome, policy, &comment.id)?;
        match (&outcome, decision) {
            (ParseOutcome::Parsed { .. }, _) => counts.parsed += 1,
            (ParseOutcome::Unparseable { .. }, Decision::Excluded) => {
                counts.unparseable += 1;
                counts.excluded += 1;
            }
            (ParseOutcome::Unparseable { .. }, _) => counts.unparseable += 1,
        }
        records.push(PredictionRecord {
            id: comment.id.clone(),
            gold: comment.gold,
            prompt_digest,
            request_digest: exchange.request_digest.clone(),
            raw,
            outcome,
            decision,
        });
    }

    let (confusion, report) = if dataset.labeled {
        let (gold, pred): (Vec<Label>, Vec<Label>) = records
            .iter()
            .filter_map(|r| Some((r.gold?, r.decision.label()?)))
            .unzip();
        match metrics::confusion(&gold, &pred) {
            Ok(m) => (Some(m), Some(metrics::report(&m).expect("non-empty matrix"))),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };

    let finished_at = SystemTime::now();
    let provenance = Provenance {
        started_at_unix_ms: unix_ms(started_at),
        finished_at_unix_ms: unix_ms(finished_at),
        duration_ms: clock.elapsed().as_millis() as u64,
        cache_hits: exchanges.iter().filter(|e| e.cache_hit).count(),
        backend_calls: exchanges.iter().filter(|e| !e.cache_hit).count(),
        total_attempts: exchanges
            .iter()
            .filter(|e| !e.cache_hit)
            .map(|e| u64::from(e.response.attempt_count))
            .sum(),
        total_latency_ms: exchanges
            .iter()
            .filter(|e| !e.cache_hit)
            .map(|e| e.response.latency_ms)
            .sum(),
        cache_warnings: cache.warnings(),
    };

    let mut result = ExperimentResult {
        config: cfg.clone(),
        backend: backend.name().to_string(),
        temperature,
        template_name: template.name().to_string(),
        template_instruction: template.instruction().to_string(),
        fallback_policy: policy,
        dataset: DatasetInfo {
            source_path: cfg.dataset_path.clone(),
            language_pair: dataset.language_pair,
            size: dataset.len(),
            labeled: dataset.labeled,
        },
        counts,
        confusion,
        report,
        records,
        content_digest: String::new(),
        provenance,
    };
    result.content_digest = result.comparison_digest();
    result.write_to(out_dir)?;
    Ok(result)
}
