//! Zero-shot classification prompt templates.

use serde::Serialize;
use thiserror::Error;

use crate::corpus::LanguagePair;

/// Placeholder token replaced by the comment text.
pub const PLACEHOLDER: &str = "<Text>";

/// Instruction used for both Tamil-English and Malayalam-English.
pub const DEFAULT_INSTRUCTION: &str =
    "Please Check whether the comment-<Text> is Sarcastic or Non-sarcastic. Only state Sarcastic or Non-sarcastic";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt instruction must contain `<Text>` exactly once, found {0} occurrence(s)")]
    Placeholder(usize),
    #[error("cannot render a prompt for empty comment text")]
    EmptyComment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptTemplate {
    name: String,
    language_pair: LanguagePair,
    instruction: String,
    // byte offset of the placeholder inside `instruction`
    #[serde(skip)]
    slot: usize,
}

impl PromptTemplate {
    pub fn new(
        name: impl Into<String>,
        language_pair: LanguagePair,
        instruction: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let instruction = instruction.into();
        let occurrences = instruction.matches(PLACEHOLDER).count();
        if occurrences != 1 {
            return Err(PromptError::Placeholder(occurrences));
        }
        let slot = instruction.find(PLACEHOLDER).expect("counted above");
        Ok(Self {
            name: name.into(),
            language_pair,
            instruction,
            slot,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn language_pair(&self) -> LanguagePair {
        self.language_pair
    }

    pub fn instruction(&self) -> &str {
        &self.instruction
    }

    /// Substitutes the comment text into the single placeholder slot.
    ///
    /// Substitution happens once, so a comment that itself contains
    /// `<Text>` is inserted verbatim and not expanded again.
    pub fn render(&self, comment_text: &str) -> Result<String, PromptError> {
        if comment_text.is_empty() {
            return Err(PromptError::EmptyComment);
        }
        let mut out = String::with_capacity(self.instruction.len() - PLACEHOLDER.len() + comment_text.len());
        out.push_str(&self.instruction[..self.slot]);
        out.push_str(comment_text);
        out.push_str(&self.instruction[self.slot + PLACEHOLDER.len()..]);
        Ok(out)
    }
}

pub fn default_template(lp: LanguagePair) -> PromptTemplate {
    let name = match lp {
        LanguagePair::TamilEnglish => "zero-shot-tamil",
        LanguagePair::MalayalamEnglish => "zero-shot-malayalam",
    };
    PromptTemplate::new(name, lp, DEFAULT_INSTRUCTION).expect("default instruction has one placeholder")
}
