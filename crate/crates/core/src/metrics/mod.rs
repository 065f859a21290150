//! Exact binary classification metrics.
//!
//! All quantities are computed from integer confusion counts in `f64`;
//! rounding only happens at display time via [`round_half_up`].

mod reconstruct;
mod report;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

pub use reconstruct::{reconstruct, Candidate, PublishedReport, PublishedRow, DEFAULT_TOLERANCE};
pub use report::{report, AverageMetrics, ClassMetrics, ClassificationReport};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold and predicted sequences differ in length ({gold} vs {pred})")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("cannot tabulate an empty label sequence")]
    Empty,
    #[error("cannot score a confusion matrix with zero total")]
    ZeroTotal,
    #[error("inconsistent report: no integer confusion matrix matches every value within tolerance")]
    InconsistentReport,
    #[error("invalid report target: {0}")]
    InvalidTarget(String),
}

/// Counts indexed by `[gold][predicted]`, labels ordered as in [`Label::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    /// Builds a matrix from the four cells, gold-major:
    /// (Non/Non, Non/Sarc, Sarc/Non, Sarc/Sarc).
    pub fn from_cells(nn: u64, ns: u64, sn: u64, ss: u64) -> Self {
        Self {
            counts: [[nn, ns], [sn, ss]],
        }
    }

    pub fn get(&self, gold: Label, pred: Label) -> u64 {
        self.counts[gold.index()][pred.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Row sum, i.e. the gold support of `label`.
    pub fn support(&self, label: Label) -> u64 {
        self.counts[label.index()].iter().sum()
    }

    /// Column sum, i.e. how often `label` was predicted.
    pub fn predicted(&self, label: Label) -> u64 {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    /// Expands the matrix back into aligned `(gold, pred)` sequences.
    pub fn to_pairs(&self) -> (Vec<Label>, Vec<Label>) {
        let mut gold = Vec::with_capacity(self.total() as usize);
        let mut pred = Vec::with_capacity(self.total() as usize);
        for g in Label::ALL {
            for p in Label::ALL {
                for _ in 0..self.get(g, p) {
                    gold.push(g);
                    pred.push(p);
                }
            }
        }
        (gold, pred)
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[nn, ns], [sn, ss]] = self.counts;
        write!(f, "NN={nn} NS={ns} SN={sn} SS={ss}")
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut counts = [[0u64; 2]; 2];
    for (g, p) in gold.iter().zip(pred) {
        counts[g.index()][p.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Decimal rounding with ties away from zero.
///
/// Operates on the shortest decimal representation of `x`, so values such as
/// `0.495` (stored as 0.49499999…) round to `0.50` as they read.
pub fn round_half_up(x: f64, places: u32) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((repr.as_str(), ""));
    let places = places as usize;
    if frac_part.len() <= places {
        return x;
    }
    // digits of the value truncated to `places`, as one integer
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().take(places))
        .map(|b| b - b'0')
        .collect();
    if frac_part.as_bytes()[places] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    let text: String = digits[..split]
        .iter()
        .map(|d| char::from(b'0' + d))
        .chain(std::iter::once('.'))
        .chain(digits[split..].iter().map(|d| char::from(b'0' + d)))
        .collect();
    let magnitude: f64 = text.parse().expect("digits form a valid decimal");
    magnitude.copysign(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{NonSarcastic as N, Sarcastic as S};

    #[test]
    fn perfect_prediction_is_diagonal() {
        let m = confusion(&[S, N], &[S, N]).unwrap();
        assert_eq!(m, ConfusionMatrix::from_cells(1, 0, 0, 1));
    }

    #[test]
    fn direct_count() {
        let m = confusion(&[N, N, S], &[S, N, S]).unwrap();
        assert_eq!((m.get(N, N), m.get(N, S), m.get(S, N), m.get(S, S)), (1, 1, 0, 1));
        assert_eq!(m.total(), 3);
        assert_eq!(m.support(N), 2);
        assert_eq!(m.predicted(S), 2);
    }

    #[test]
    fn confusion_errors() {
        assert_eq!(
            confusion(&[N], &[N, S]).unwrap_err(),
            MetricsError::LengthMismatch { gold: 1, pred: 2 }
        );
        assert_eq!(confusion(&[], &[]).unwrap_err(), MetricsError::Empty);
    }

    #[test]
    fn pairs_round_trip() {
        let m = ConfusionMatrix::from_cells(3, 1, 4, 2);
        let (g, p) = m.to_pairs();
        assert_eq!(confusion(&g, &p).unwrap(), m);
    }

    #[test]
    fn rounding_examples() {
        assert_eq!(round_half_up(0.495, 2), 0.50);
        assert_eq!(round_half_up(0.6928, 2), 0.69);
        assert_eq!(round_half_up(0.7040, 2), 0.70);
        assert_eq!(round_half_up(0.005, 2), 0.01);
        assert_eq!(round_half_up(0.004999, 2), 0.0);
        assert_eq!(round_half_up(0.995, 2), 1.0);
        assert_eq!(round_half_up(9.995, 2), 10.0);
        assert_eq!(round_half_up(-0.125, 2), -0.13);
        assert_eq!(round_half_up(2.5, 0), 3.0);
        assert_eq!(round_half_up(0.5, 2), 0.5);
        assert_eq!(round_half_up(1e-20, 2), 0.0);
        assert!(round_half_up(f64::NAN, 2).is_nan());
    }
}
