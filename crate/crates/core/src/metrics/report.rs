use std::fmt;

use serde::{Deserialize, Serialize};

use super::{round_half_up, ConfusionMatrix, MetricsError};
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class and averaged precision/recall/F1.
///
/// Macro rows are unweighted arithmetic means of the per-class values (F1
/// is averaged directly, not recomputed from the mean P and R). Weighted
/// rows use gold support as weights. Micro rows pool all counts, which for
/// single-label data collapses to accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub micro: AverageMetrics,
    #[serde(rename = "macro")]
    pub macro_avg: AverageMetrics,
    pub weighted: AverageMetrics,
    pub total_support: u64,
    /// Cells where a zero denominator forced a value of 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_division: Vec<String>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub(crate) fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn report(m: &ConfusionMatrix) -> Result<ClassificationReport, MetricsError> {
    let total = m.total();
    if total == 0 {
        return Err(MetricsError::ZeroTotal);
    }
    let mut zero_division = Vec::new();
    let per_class: Vec<ClassMetrics> = Label::ALL
        .iter()
        .map(|&label| {
            let tp = m.get(label, label);
            let support = m.support(label);
            let precision = ratio(tp, m.predicted(label)).unwrap_or_else(|| {
                zero_division.push(format!("{label} precision (never predicted)"));
                0.0
            });
            let recall = ratio(tp, support).unwrap_or_else(|| {
                zero_division.push(format!("{label} recall (no gold instances)"));
                0.0
            });
            if precision + recall == 0.0 {
                zero_division.push(format!("{label} f1 (precision + recall = 0)"));
            }
            ClassMetrics {
                label,
                precision,
                recall,
                f1: f1_score(precision, recall),
                support,
            }
        })
        .collect();

    let accuracy = m.accuracy();
    let micro = AverageMetrics {
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
    };

    let n = per_class.len() as f64;
    let macro_avg = AverageMetrics {
        precision: per_class.iter().map(|c| c.precision).sum::<f64>() / n,
        recall: per_class.iter().map(|c| c.recall).sum::<f64>() / n,
        f1: per_class.iter().map(|c| c.f1).sum::<f64>() / n,
    };

    let weigh =
        |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / total as f64;
    let weighted = AverageMetrics {
        precision: weigh(|c| c.precision),
        recall: weigh(|c| c.recall),
        f1: weigh(|c| c.f1),
    };

    Ok(ClassificationReport {
        per_class,
        micro,
        macro_avg,
        weighted,
        total_support: total,
        zero_division,
    })
}

impl ClassificationReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    /// Rows in display order: per-class rows, then micro, macro and weighted
    /// averages. Each row is `(name, [precision, recall, f1], support)`.
    pub fn rows(&self) -> Vec<(&'static str, [f64; 3], u64)> {
        let mut rows: Vec<_> = self
            .per_class
            .iter()
            .map(|c| (c.label.as_str(), [c.precision, c.recall, c.f1], c.support))
            .collect();
        for (name, avg) in [
            ("Micro avg", &self.micro),
            ("Macro avg", &self.macro_avg),
            ("Weighted avg", &self.weighted),
        ] {
            rows.push((name, [avg.precision, avg.recall, avg.f1], self.total_support));
        }
        rows
    }

    /// Same report with every real value rounded half-up to `places` decimals.
    pub fn rounded(&self, places: u32) -> ClassificationReport {
        let r = |x: f64| round_half_up(x, places);
        let avg = |a: &AverageMetrics| AverageMetrics {
            precision: r(a.precision),
            recall: r(a.recall),
            f1: r(a.f1),
        };
        ClassificationReport {
            per_class: self
                .per_class
                .iter()
                .map(|c| ClassMetrics {
                    precision: r(c.precision),
                    recall: r(c.recall),
                    f1: r(c.f1),
                    ..*c
                })
                .collect(),
            micro: avg(&self.micro),
            macro_avg: avg(&self.macro_avg),
            weighted: avg(&self.weighted),
            total_support: self.total_support,
            zero_division: self.zero_division.clone(),
        }
    }

    /// Pretty JSON; key order follows field declaration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fixed-width table: per-class rows, then Micro, Macro and Weighted avg.
impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14}{:>10}{:>8}{:>10}{:>9}",
            "", "Precision", "Recall", "F1-Score", "Support"
        )?;
        let rows = self.rows();
        for (i, (name, [p, r, f1], support)) in rows.iter().enumerate() {
            write!(
                f,
                "{:<14}{:>10.2}{:>8.2}{:>10.2}{:>9}",
                name,
                round_half_up(*p, 2),
                round_half_up(*r, 2),
                round_half_up(*f1, 2),
                support
            )?;
            if i + 1 < rows.len() {
                writeln!(f)?;
            }
        }
        for note in &self.zero_division {
            write!(f, "\nnote: zero division in {note}; value set to 0")?;
        }
        Ok(())
    }
}
