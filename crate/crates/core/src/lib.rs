//! Zero-shot sarcasm classification of code-mixed Tamil-English and
//! Malayalam-English comments through a chat-completion model, plus an
//! exact metrics engine for binary classification reports.
//!
//! Modules, bottom-up:
//!
//! - [`corpus`]: labels, TSV datasets, validation and stratified sampling
//! - [`prompt`]: the zero-shot instruction template
//! - [`backend`]: remote and mock chat backends with a replay cache
//! - [`parse`]: completion text to label, with fallback policies
//! - [`metrics`]: confusion matrices, reports, reconstruction from rounded tables
//! - [`runner`]: experiments and temperature sweeps
//! - [`cli`]: the `codemix-sarcasm` command line

pub mod backend;
pub mod cli;
pub mod corpus;
pub mod metrics;
pub mod parse;
pub mod prompt;
pub mod runner;

pub use corpus::{Dataset, Label, LabeledComment, LanguagePair};
pub use metrics::{ClassificationReport, ConfusionMatrix};
pub use parse::{FallbackPolicy, ParseOutcome};
