//! Recovering integer confusion matrices from a rounded, published report.
//!
//! With two classes and known supports, a matrix is fixed by its two
//! diagonal cells, so the search is exhaustive over
//! `NN ∈ [0, support_N] × SS ∈ [0, support_S]`. When a class recall is
//! given, the matching diagonal cell is confined to the band that recall
//! allows before any report is computed.

use serde::{Deserialize, Serialize};

use super::report::f1_score;
use super::{round_half_up, ClassificationReport, ConfusionMatrix, MetricsError};
use crate::corpus::Label;

/// Half a unit in the second decimal place: a value printed with two
/// decimals lies within this distance of the true value.
pub const DEFAULT_TOLERANCE: f64 = 0.005;

// absorbs binary representation error at the tolerance boundary
const SLACK: f64 = 1e-9;

/// One printed row; `None` marks a cell that is not constrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl PublishedRow {
    pub fn new(precision: f64, recall: f64, f1: f64) -> Self {
        Self {
            precision: Some(precision),
            recall: Some(recall),
            f1: Some(f1),
        }
    }

    /// Row with precision and recall only.
    pub fn pr(precision: f64, recall: f64) -> Self {
        Self {
            precision: Some(precision),
            recall: Some(recall),
            f1: None,
        }
    }

    /// Row whose three cells share one printed value (a micro-average row).
    pub fn uniform(v: f64) -> Self {
        Self::new(v, v, v)
    }

    fn cells(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        [self.precision, self.recall, self.f1]
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
    }
}

/// A classification report as printed: exact supports plus rounded values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedReport {
    /// Gold supports in label order (Non-sarcastic, Sarcastic).
    pub supports: [u64; 2],
    pub per_class: [PublishedRow; 2],
    #[serde(default)]
    pub micro: PublishedRow,
    #[serde(default, rename = "macro")]
    pub macro_avg: PublishedRow,
    #[serde(default)]
    pub weighted: PublishedRow,
}

impl PublishedReport {
    /// Rounds every cell of `r` to `places` decimals.
    pub fn from_report(r: &ClassificationReport, places: u32) -> Self {
        let round = |p: f64, rc: f64, f: f64| {
            PublishedRow::new(
                round_half_up(p, places),
                round_half_up(rc, places),
                round_half_up(f, places),
            )
        };
        let c = |l: Label| {
            let m = r.class(l);
            round(m.precision, m.recall, m.f1)
        };
        Self {
            supports: [r.class(Label::NonSarcastic).support, r.class(Label::Sarcastic).support],
            per_class: [c(Label::NonSarcastic), c(Label::Sarcastic)],
            micro: round(r.micro.precision, r.micro.recall, r.micro.f1),
            macro_avg: round(r.macro_avg.precision, r.macro_avg.recall, r.macro_avg.f1),
            weighted: round(r.weighted.precision, r.weighted.recall, r.weighted.f1),
        }
    }

    fn rows(&self) -> [&PublishedRow; 5] {
        [
            &self.per_class[0],
            &self.per_class[1],
            &self.micro,
            &self.macro_avg,
            &self.weighted,
        ]
    }

    fn validate(&self) -> Result<(), MetricsError> {
        if self.supports.iter().sum::<u64>() == 0 {
            return Err(MetricsError::InvalidTarget("supports sum to zero".into()));
        }
        for row in self.rows() {
            for (_, v) in row.cells() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(MetricsError::InvalidTarget(format!("value {v} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub matrix: ConfusionMatrix,
    /// L2 distance between the unrounded recomputed values and the printed ones.
    pub residual: f64,
}

/// The 15 report values of the matrix with diagonal `(nn, ss)`, in row order
/// Non-sarcastic, Sarcastic, micro, macro, weighted; each row P, R, F1.
fn report_values(nn: u64, ss: u64, sup_n: u64, sup_s: u64) -> [[f64; 3]; 5] {
    let ns = sup_n - nn;
    let sn = sup_s - ss;
    let total = (sup_n + sup_s) as f64;
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (p_n, r_n) = (div(nn, nn + sn), div(nn, sup_n));
    let (p_s, r_s) = (div(ss, ss + ns), div(ss, sup_s));
    let (f_n, f_s) = (f1_score(p_n, r_n), f1_score(p_s, r_s));
    let acc = (nn + ss) as f64 / total;
    let (w_n, w_s) = (sup_n as f64 / total, sup_s as f64 / total);
    [
        [p_n, r_n, f_n],
        [p_s, r_s, f_s],
        [acc, acc, acc],
        [(p_n + p_s) / 2.0, (r_n + r_s) / 2.0, (f_n + f_s) / 2.0],
        [w_n * p_n + w_s * p_s, w_n * r_n + w_s * r_s, w_n * f_n + w_s * f_s],
    ]
}

/// Diagonal cells `d` with `|d / support - recall| <= tol`, or the full range.
fn diagonal_band(support: u64, recall: Option<f64>, tol: f64) -> std::ops::RangeInclusive<u64> {
    match recall {
        Some(r) if support > 0 => {
            let lo = ((r - tol - SLACK) * support as f64).floor().max(0.0) as u64;
            let hi = ((r + tol + SLACK) * support as f64).ceil().max(0.0) as u64;
            lo..=hi.min(support)
        }
        _ => 0..=support,
    }
}

/// Every integer matrix with the published supports whose recomputed report
/// is within `tolerance` of each given value, best (smallest residual) first.
/// Ties break on ascending NN, then ascending SS.
pub fn reconstruct(target: &PublishedReport, tolerance: f64) -> Result<Vec<Candidate>, MetricsError> {
    target.validate()?;
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(MetricsError::InvalidTarget(format!(
            "tolerance {tolerance} must be non-negative"
        )));
    }
    let [sup_n, sup_s] = target.supports;
    let rows = target.rows();
    let limit = tolerance + SLACK;

    let mut found = Vec::new();
    for nn in diagonal_band(sup_n, target.per_class[0].recall, tolerance) {
        'ss: for ss in diagonal_band(sup_s, target.per_class[1].recall, tolerance) {
            let values = report_values(nn, ss, sup_n, sup_s);
            let mut sq = 0.0;
            for (row, computed) in rows.iter().zip(values.iter()) {
                for (i, printed) in row.cells() {
                    let d = computed[i] - printed;
                    if d.abs() > limit {
                        continue 'ss;
                    }
                    sq += d * d;
                }
            }
            found.push(Candidate {
                matrix: ConfusionMatrix::from_cells(nn, sup_n - nn, sup_s - ss, ss),
                residual: sq.sqrt(),
            });
        }
    }
    if found.is_empty() {
        return Err(MetricsError::InconsistentReport);
    }
    found.sort_by(|a, b| {
        a.residual
            .total_cmp(&b.residual)
            .then(a.matrix.counts[0][0].cmp(&b.matrix.counts[0][0]))
            .then(a.matrix.counts[1][1].cmp(&b.matrix.counts[1][1]))
    });
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::super::report;
    use super::*;

    fn perfect(n: u64, s: u64) -> PublishedReport {
        PublishedReport {
            supports: [n, s],
            per_class: [PublishedRow::uniform(1.0); 2],
            micro: PublishedRow::uniform(1.0),
            macro_avg: PublishedRow::uniform(1.0),
            weighted: PublishedRow::uniform(1.0),
        }
    }

    #[test]
    fn perfect_report_has_unique_diagonal_solution() {
        let c = reconstruct(&perfect(10, 10), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].matrix, ConfusionMatrix::from_cells(10, 0, 0, 10));
        assert_eq!(c[0].residual, 0.0);
    }

    #[test]
    fn infeasible_report_is_inconsistent() {
        let mut t = perfect(5, 5);
        t.per_class[1] = PublishedRow::pr(1.0, 0.5);
        assert_eq!(
            reconstruct(&t, DEFAULT_TOLERANCE).unwrap_err(),
            MetricsError::InconsistentReport
        );
    }

    #[test]
    fn invalid_targets() {
        let mut t = perfect(0, 0);
        assert!(matches!(reconstruct(&t, 0.005), Err(MetricsError::InvalidTarget(_))));
        t = perfect(3, 3);
        t.micro.f1 = Some(1.5);
        assert!(matches!(reconstruct(&t, 0.005), Err(MetricsError::InvalidTarget(_))));
        assert!(matches!(
            reconstruct(&perfect(3, 3), f64::NAN),
            Err(MetricsError::InvalidTarget(_))
        ));
    }

    #[test]
    fn report_values_agree_with_report() {
        for (nn, ns, sn, ss) in [(3, 2, 1, 4), (0, 5, 2, 0), (7, 0, 0, 1), (1689, 625, 371, 141)] {
            let m = ConfusionMatrix::from_cells(nn, ns, sn, ss);
            let r = report(&m).unwrap();
            let v = report_values(nn, ss, nn + ns, sn + ss);
            for (row, (_, expected, _)) in v.iter().zip(r.rows()) {
                for i in 0..3 {
                    assert!((row[i] - expected[i]).abs() < 1e-12);
                }
            }
        }
    }

    /// Unpruned enumeration, used to check that the recall band never drops a match.
    fn exhaustive(target: &PublishedReport, tol: f64) -> Vec<(u64, u64)> {
        let [sn, ss] = target.supports;
        let mut out = Vec::new();
        for a in 0..=sn {
            for b in 0..=ss {
                let m = ConfusionMatrix::from_cells(a, sn - a, ss - b, b);
                let r = report(&m).unwrap();
                let ok = target
                    .rows()
                    .iter()
                    .zip(r.rows())
                    .all(|(row, (_, vals, _))| row.cells().all(|(i, v)| (vals[i] - v).abs() <= tol + SLACK));
                if ok {
                    out.push((a, b));
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn pruned_search_matches_exhaustive() {
        let targets = [
            PublishedReport::from_report(&report(&ConfusionMatrix::from_cells(23, 9, 7, 11)).unwrap(), 2),
            PublishedReport::from_report(&report(&ConfusionMatrix::from_cells(40, 0, 3, 2)).unwrap(), 1),
        ];
        for t in targets {
            for tol in [0.005, 0.02, 0.05] {
                let mut got: Vec<(u64, u64)> = reconstruct(&t, tol)
                    .map(|v| {
                        v.iter()
                            .map(|c| (c.matrix.counts[0][0], c.matrix.counts[1][1]))
                            .collect()
                    })
                    .unwrap_or_default();
                got.sort();
                assert_eq!(got, exhaustive(&t, tol), "tol {tol}");
            }
        }
    }

    #[test]
    fn ordering_is_residual_then_nn() {
        let t = PublishedReport {
            supports: [20, 20],
            per_class: [PublishedRow::pr(0.5, 0.5), PublishedRow::default()],
            micro: PublishedRow::default(),
            macro_avg: PublishedRow::default(),
            weighted: PublishedRow::default(),
        };
        let c = reconstruct(&t, 0.2).unwrap();
        assert!(c.windows(2).all(|w| {
            w[0].residual < w[1].residual
                || (w[0].residual == w[1].residual && w[0].matrix.counts[0][0] <= w[1].matrix.counts[0][0])
        }));
    }
}
