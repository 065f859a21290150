//! Scoring a predictions file against a gold dataset.
//!
//! A predictions file is TSV with a header naming an `id` column and a
//! prediction column called `final` (as written by the runner) or `label`.
//! Prediction cells are `Sarcastic`, `Non-sarcastic`, or `excluded`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{numbered_lines, read_utf8, unescape_field, CorpusError, Dataset, Label};
use crate::metrics::{self, ClassificationReport, ConfusionMatrix, MetricsError};
use crate::parse::Decision;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub id: String,
    pub decision: Decision,
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: header needs an `id` column and a `final` or `label` column")]
    Header { path: PathBuf },
    #[error("{path}: line {line}: {message}")]
    Row {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("gold dataset has no labels")]
    Unlabeled,
    #[error("ids diverge at row {index}: gold {gold:?}, predictions {predicted:?}")]
    IdMismatch {
        index: usize,
        gold: Option<String>,
        predicted: Option<String>,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, ScoreError> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    let content = content.strip_prefix('\u{feff}').unwrap_or(&content);
    let mut lines = numbered_lines(content);
    let header: Vec<&str> = lines.next().map(|(_, l)| l.split('\t').collect()).unwrap_or_default();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let (Some(id_col), Some(pred_col)) = (col("id"), col("final").or_else(|| col("label"))) else {
        return Err(ScoreError::Header {
            path: path.to_path_buf(),
        });
    };

    let mut out = Vec::new();
    for (line, text) in lines {
        let row_err = |message: String| ScoreError::Row {
            path: path.to_path_buf(),
            line,
            message,
        };
        let cells: Vec<&str> = text.split('\t').collect();
        if cells.len() != header.len() {
            return Err(row_err(format!(
                "expected {} columns, found {}",
                header.len(),
                cells.len()
            )));
        }
        let decision = match cells[pred_col] {
            "excluded" => Decision::Excluded,
            other => Decision::Label(other.parse::<Label>().map_err(row_err)?),
        };
        out.push(Prediction {
            id: unescape_field(cells[id_col]),
            decision,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreOutcome {
    pub scored: usize,
    pub excluded: usize,
    pub confusion: ConfusionMatrix,
    pub report: ClassificationReport,
}

/// Requires predictions to list exactly the gold ids, in gold order.
pub fn score_predictions(gold: &Dataset, predictions: &[Prediction]) -> Result<ScoreOutcome, ScoreError> {
    if !gold.labeled {
        return Err(ScoreError::Unlabeled);
    }
    let n = gold.len().max(predictions.len());
    for i in 0..n {
        let g = gold.comments.get(i).map(|c| c.id.as_str());
        let p = predictions.get(i).map(|p| p.id.as_str());
        if g != p {
            return Err(ScoreError::IdMismatch {
                index: i,
                gold: g.map(String::from),
                predicted: p.map(String::from),
            });
        }
    }
    let mut excluded = 0;
    let (g, p): (Vec<Label>, Vec<Label>) = gold
        .comments
        .iter()
        .zip(predictions)
        .filter_map(|(c, pred)| match pred.decision {
            Decision::Label(l) => Some((c.gold.expect("labeled dataset"), l)),
            Decision::Excluded => {
                excluded += 1;
                None
            }
        })
        .unzip();
    let confusion = metrics::confusion(&g, &p)?;
    let report = metrics::report(&confusion)?;
    Ok(ScoreOutcome {
        scored: g.len(),
        excluded,
        confusion,
        report,
    })
}
