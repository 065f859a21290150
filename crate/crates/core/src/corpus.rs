//! Code-mixed comment corpora: labels, TSV loading, validation and sampling.
//!
//! The on-disk format is UTF-8 tab-separated text with a header line of
//! either `id<TAB>text` (unlabeled) or `id<TAB>text<TAB>label` (labeled).
//! Tabs, newlines, carriage returns and backslashes inside a field are
//! escaped as `\t`, `\n`, `\r` and `\\` so that every comment occupies
//! exactly one line.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gold or predicted class of a comment.
///
/// The declaration order fixes the matrix/report order used everywhere:
/// `NonSarcastic` first, then `Sarcastic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "Non-sarcastic")]
    NonSarcastic,
    #[serde(rename = "Sarcastic")]
    Sarcastic,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::NonSarcastic, Label::Sarcastic];

    /// Row/column index in a confusion matrix.
    pub fn index(self) -> usize {
        match self {
            Label::NonSarcastic => 0,
            Label::Sarcastic => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NonSarcastic => "Non-sarcastic",
            Label::Sarcastic => "Sarcastic",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strict parse of a gold label cell. Only the two canonical spellings are
/// accepted; lenient matching of model output lives in [`crate::parse`].
impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Sarcastic" => Ok(Label::Sarcastic),
            "Non-sarcastic" => Ok(Label::NonSarcastic),
            other => Err(format!(
                "invalid label {other:?} (expected `Sarcastic` or `Non-sarcastic`)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanguagePair {
    TamilEnglish,
    MalayalamEnglish,
}

impl LanguagePair {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguagePair::TamilEnglish => "tamil-english",
            LanguagePair::MalayalamEnglish => "malayalam-english",
        }
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguagePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tamil-english" | "tamil" | "ta" => Ok(LanguagePair::TamilEnglish),
            "malayalam-english" | "malayalam" | "ml" => Ok(LanguagePair::MalayalamEnglish),
            other => Err(format!("unknown language pair {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledComment {
    pub id: String,
    pub text: String,
    pub gold: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub language_pair: LanguagePair,
    pub comments: Vec<LabeledComment>,
    pub source_path: PathBuf,
    /// Whether the source header carried a label column.
    pub labeled: bool,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    /// Gold labels in dataset order, or `None` for an unlabeled dataset.
    pub fn gold_labels(&self) -> Option<Vec<Label>> {
        if !self.labeled {
            return None;
        }
        self.comments.iter().map(|c| c.gold).collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 on line {line}")]
    InvalidUtf8 { path: PathBuf, line: usize },
    #[error("{path}: bad header {found:?} (expected `id<TAB>text` or `id<TAB>text<TAB>label`)")]
    BadHeader { path: PathBuf, found: String },
    #[error("{path}: line {line}: expected {expected} columns, found {found}")]
    ColumnCount {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: empty id")]
    EmptyId { path: PathBuf, line: usize },
    #[error("{path}: line {line}: duplicate id {id:?} (first seen on line {first_line})")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
        first_line: usize,
    },
    #[error("{path}: line {line}: comment text is empty")]
    EmptyText { path: PathBuf, line: usize },
    #[error("{path}: line {line}: {message}")]
    InvalidLabel {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot sample {requested} comments from a dataset of {available}")]
    SampleTooLarge { requested: usize, available: usize },
}

/// Escapes a field so it fits on one TSV line.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_field`]. Unknown escape sequences are kept verbatim.
pub fn unescape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

pub(crate) fn read_utf8(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| {
        let offset = e.utf8_error().valid_up_to();
        let line = e.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count() + 1;
        CorpusError::InvalidUtf8 {
            path: path.to_path_buf(),
            line,
        }
    })
}

/// Splits file content into `(line_number, line)` pairs, dropping a trailing
/// `\r` (CRLF files) and skipping blank lines.
pub(crate) fn numbered_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

pub fn load_dataset(path: impl AsRef<Path>, language_pair: LanguagePair) -> Result<Dataset, CorpusError> {
    let path = path.as_ref();
    let content = read_utf8(path)?;
    parse_dataset(&content, path, language_pair)
}

/// Parses TSV content already in memory. `path` is only used for provenance
/// and error messages.
pub fn parse_dataset(content: &str, path: &Path, language_pair: LanguagePair) -> Result<Dataset, CorpusError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let mut lines = numbered_lines(content);
    let header = lines.next().map(|(_, l)| l).unwrap_or("");
    let labeled = match header {
        "id\ttext\tlabel" => true,
        "id\ttext" => false,
        other => {
            return Err(CorpusError::BadHeader {
                path: path.to_path_buf(),
                found: other.to_string(),
            })
        }
    };
    let expected = if labeled { 3 } else { 2 };

    let mut comments = Vec::new();
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for (line_no, line) in lines {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != expected {
            return Err(CorpusError::ColumnCount {
                path: path.to_path_buf(),
                line: line_no,
                expected,
                found: cols.len(),
            });
        }
        let id = unescape_field(cols[0]);
        if id.trim().is_empty() {
            return Err(CorpusError::EmptyId {
                path: path.to_path_buf(),
                line: line_no,
            });
        }
        if let Some(&first_line) = seen.get(&id) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id,
                first_line,
            });
        }
        let text = unescape_field(cols[1]);
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText {
                path: path.to_path_buf(),
                line: line_no,
            });
        }
        let gold = if labeled {
            Some(cols[2].parse::<Label>().map_err(|message| CorpusError::InvalidLabel {
                path: path.to_path_buf(),
                line: line_no,
                message,
            })?)
        } else {
            None
        };
        seen.insert(id.clone(), line_no);
        comments.push(LabeledComment { id, text, gold });
    }

    Ok(Dataset {
        language_pair,
        comments,
        source_path: path.to_path_buf(),
        labeled,
    })
}

/// Serializes a dataset in the canonical TSV format.
pub fn to_tsv(d: &Dataset) -> String {
    let mut out = String::new();
    out.push_str(if d.labeled { "id\ttext\tlabel\n" } else { "id\ttext\n" });
    for c in &d.comments {
        out.push_str(&escape_field(&c.id));
        out.push('\t');
        out.push_str(&escape_field(&c.text));
        if d.labeled {
            out.push('\t');
            out.push_str(c.gold.map(Label::as_str).unwrap_or(""));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    CountMismatch {
        expected: usize,
        found: usize,
    },
    DuplicateId {
        id: String,
        indices: Vec<usize>,
    },
    EmptyText {
        id: String,
        index: usize,
    },
    EmptyId {
        index: usize,
    },
    /// Labeled dataset with some comments lacking gold, or the reverse.
    MixedLabeling {
        labeled: usize,
        unlabeled: usize,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::CountMismatch { expected, found } => {
                write!(f, "count mismatch: expected {expected} comments, found {found}")
            }
            ValidationIssue::DuplicateId { id, indices } => {
                write!(f, "duplicate id {id:?} at rows {indices:?}")
            }
            ValidationIssue::EmptyText { id, index } => write!(f, "empty text for id {id:?} at row {index}"),
            ValidationIssue::EmptyId { index } => write!(f, "empty id at row {index}"),
            ValidationIssue::MixedLabeling { labeled, unlabeled } => {
                write!(
                    f,
                    "mixed labeling: {labeled} labeled and {unlabeled} unlabeled comments"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub language_pair: LanguagePair,
    pub total: usize,
    pub labeled: bool,
    pub non_sarcastic: usize,
    pub sarcastic: usize,
    /// Majority count over minority count; `None` when unlabeled or a class is absent.
    pub imbalance_ratio: Option<f64>,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationSummary {
    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::NonSarcastic => self.non_sarcastic,
            Label::Sarcastic => self.sarcastic,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

impl fmt::Display for ValidationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "language pair : {}", self.language_pair)?;
        writeln!(f, "total         : {}", self.total)?;
        if self.labeled {
            writeln!(f, "Non-sarcastic : {}", self.non_sarcastic)?;
            writeln!(f, "Sarcastic     : {}", self.sarcastic)?;
            match self.imbalance_ratio {
                Some(r) => writeln!(f, "imbalance     : {r:.3}")?,
                None => writeln!(f, "imbalance     : n/a")?,
            }
        } else {
            writeln!(f, "labels        : none (unlabeled dataset)")?;
        }
        if self.issues.is_empty() {
            write!(f, "status        : ok")
        } else {
            write!(f, "status        : {} issue(s)", self.issues.len())?;
            for issue in &self.issues {
                write!(f, "\n  - {issue}")?;
            }
            Ok(())
        }
    }
}

/// Summarizes a dataset. Never fails; problems are reported as issues.
pub fn validate_dataset(d: &Dataset, expected_count: Option<usize>) -> ValidationSummary {
    let mut issues = Vec::new();
    if let Some(expected) = expected_count {
        if expected != d.len() {
            issues.push(ValidationIssue::CountMismatch {
                expected,
                found: d.len(),
            });
        }
    }

    let mut by_id: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in d.comments.iter().enumerate() {
        if c.id.trim().is_empty() {
            issues.push(ValidationIssue::EmptyId { index: i });
        } else {
            by_id.entry(c.id.as_str()).or_default().push(i);
        }
        if c.text.trim().is_empty() {
            issues.push(ValidationIssue::EmptyText {
                id: c.id.clone(),
                index: i,
            });
        }
    }
    // report duplicates in first-occurrence order
    let mut dups: Vec<(&str, Vec<usize>)> = by_id.into_iter().filter(|(_, v)| v.len() > 1).collect();
    dups.sort_by_key(|(_, v)| v[0]);
    issues.extend(dups.into_iter().map(|(id, indices)| ValidationIssue::DuplicateId {
        id: id.to_string(),
        indices,
    }));

    let with_gold = d.comments.iter().filter(|c| c.gold.is_some()).count();
    let without_gold = d.len() - with_gold;
    if (d.labeled && without_gold > 0) || (!d.labeled && with_gold > 0) {
        issues.push(ValidationIssue::MixedLabeling {
            labeled: with_gold,
            unlabeled: without_gold,
        });
    }

    let (mut non_sarcastic, mut sarcastic) = (0, 0);
    if d.labeled {
        for c in &d.comments {
            match c.gold {
                Some(Label::NonSarcastic) => non_sarcastic += 1,
                Some(Label::Sarcastic) => sarcastic += 1,
                None => {}
            }
        }
    }
    let imbalance_ratio = if d.labeled && non_sarcastic > 0 && sarcastic > 0 {
        Some(non_sarcastic.max(sarcastic) as f64 / non_sarcastic.min(sarcastic) as f64)
    } else {
        None
    };

    ValidationSummary {
        language_pair: d.language_pair,
        total: d.len(),
        labeled: d.labeled,
        non_sarcastic,
        sarcastic,
        imbalance_ratio,
        issues,
    }
}

/// Deterministic subset of `n` comments, preserving dataset order.
///
/// Labeled datasets are sampled per gold label with largest-remainder
/// allocation, so each label's share is within one item of proportional.
pub fn sample(d: &Dataset, n: usize, seed: u64) -> Result<Dataset, CorpusError> {
    if n > d.len() {
        return Err(CorpusError::SampleTooLarge {
            requested: n,
            available: d.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = if n == d.len() {
        (0..d.len()).collect()
    } else if d.labeled {
        let strata: Vec<Vec<usize>> = Label::ALL
            .iter()
            .map(|&l| {
                d.comments
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.gold == Some(l))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let quotas = proportional_quotas(&strata.iter().map(Vec::len).collect::<Vec<_>>(), n);
        strata
            .iter()
            .zip(quotas)
            .flat_map(|(members, quota)| {
                index::sample(&mut rng, members.len(), quota)
                    .into_iter()
                    .map(|k| members[k])
                    .collect::<Vec<_>>()
            })
            .collect()
    } else {
        index::sample(&mut rng, d.len(), n).into_vec()
    };
    picked.sort_unstable();

    let unique: HashSet<usize> = picked.iter().copied().collect();
    debug_assert_eq!(unique.len(), picked.len());

    Ok(Dataset {
        language_pair: d.language_pair,
        comments: picked.into_iter().map(|i| d.comments[i].clone()).collect(),
        source_path: d.source_path.clone(),
        labeled: d.labeled,
    })
}

/// Hamilton (largest remainder) apportionment of `n` seats over `sizes`.
/// Ties on the remainder go to the earlier stratum.
fn proportional_quotas(sizes: &[usize], n: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| s * n / total).collect();
    let mut remainders: Vec<(usize, usize)> = sizes.iter().enumerate().map(|(i, &s)| ((s * n) % total, i)).collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut left = n - quotas.iter().sum::<usize>();
    for (_, i) in remainders {
        if left == 0 {
            break;
        }
        if quotas[i] < sizes[i] {
            quotas[i] += 1;
            left -= 1;
        }
    }
    quotas
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(content: &str) -> Result<Dataset, CorpusError> {
        parse_dataset(content, Path::new("mem.tsv"), LanguagePair::TamilEnglish)
    }

    fn synthetic(n_non: usize, n_sarc: usize) -> Dataset {
        let mut comments = Vec::new();
        let total = n_non + n_sarc;
        for i in 0..total {
            // spread the minority class evenly through the file
            let gold = if (i + 1) * n_sarc / total > i * n_sarc / total {
                Label::Sarcastic
            } else {
                Label::NonSarcastic
            };
            comments.push(LabeledComment {
                id: format!("c{i}"),
                text: format!("comment {i}"),
                gold: Some(gold),
            });
        }
        Dataset {
            language_pair: LanguagePair::TamilEnglish,
            comments,
            source_path: PathBuf::from("synthetic"),
            labeled: true,
        }
    }

    #[test]
    fn loads_labeled_rows_in_order() {
        let d = parse("id\ttext\tlabel\nc1\tenna da idhu\tSarcastic\nc2\tsuper movie\tNon-sarcastic\n").unwrap();
        assert!(d.labeled);
        assert_eq!(d.len(), 2);
        assert_eq!(d.comments[0].id, "c1");
        assert_eq!(d.comments[0].text, "enna da idhu");
        assert_eq!(d.comments[0].gold, Some(Label::Sarcastic));
        assert_eq!(d.comments[1].gold, Some(Label::NonSarcastic));
    }

    #[test]
    fn header_only_is_empty_labeled_dataset() {
        let d = parse("id\ttext\tlabel\n").unwrap();
        assert!(d.is_empty());
        assert!(d.labeled);
        let u = parse("id\ttext\n").unwrap();
        assert!(!u.labeled);
    }

    #[test]
    fn wrong_column_count_names_line() {
        let err = parse("id\ttext\tlabel\nc1\tok\tSarcastic\nc2\tmissing label\n").unwrap_err();
        match err {
            CorpusError::ColumnCount {
                line, expected, found, ..
            } => {
                assert_eq!((line, expected, found), (3, 3, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("id\ttext\tlabel\nc2\tmissing label\n")
            .unwrap_err()
            .to_string()
            .contains("line 2"));
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = parse("id\ttext\nc1\ta\nc1\tb\n").unwrap_err();
        assert!(matches!(
            err,
            CorpusError::DuplicateId {
                line: 3,
                first_line: 2,
                ..
            }
        ));
    }

    #[test]
    fn label_spelling_is_strict() {
        for bad in ["sarcastic", "Non-Sarcastic", "NonSarcastic", "", " Sarcastic"] {
            let content = format!("id\ttext\tlabel\nc1\tx\t{bad}\n");
            assert!(
                matches!(parse(&content).unwrap_err(), CorpusError::InvalidLabel { line: 2, .. }),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(matches!(
            parse("id\ttext\nc1\t   \n").unwrap_err(),
            CorpusError::EmptyText { line: 2, .. }
        ));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            parse("foo\tbar\n").unwrap_err(),
            CorpusError::BadHeader { .. }
        ));
        assert!(matches!(parse("").unwrap_err(), CorpusError::BadHeader { .. }));
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.tsv");
        let mut bytes = b"id\ttext\nc1\tok\nc2\t".to_vec();
        bytes.extend_from_slice(&[0xff, 0xfe]);
        bytes.push(b'\n');
        fs::write(&p, bytes).unwrap();
        match load_dataset(&p, LanguagePair::MalayalamEnglish).unwrap_err() {
            CorpusError::InvalidUtf8 { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crlf_and_escapes() {
        let d = parse("id\ttext\r\nc1\tline\\none\\ttab\\\\slash\r\n").unwrap();
        assert_eq!(d.comments[0].text, "line\none\ttab\\slash");
    }

    #[test]
    fn validate_counts_and_imbalance() {
        let d = synthetic(80, 20);
        let s = validate_dataset(&d, Some(100));
        assert_eq!((s.total, s.non_sarcastic, s.sarcastic), (100, 80, 20));
        assert_eq!(s.imbalance_ratio, Some(4.0));
        assert!(s.is_clean());
        let s = validate_dataset(&d, Some(101));
        assert_eq!(
            s.issues,
            vec![ValidationIssue::CountMismatch {
                expected: 101,
                found: 100
            }]
        );
        assert_eq!(validate_dataset(&d, None), validate_dataset(&d, None));
    }

    #[test]
    fn validate_single_unlabeled() {
        let d = parse("id\ttext\nx\tonly one\n").unwrap();
        let s = validate_dataset(&d, None);
        assert_eq!((s.total, s.non_sarcastic, s.sarcastic, s.labeled), (1, 0, 0, false));
        assert!(s.is_clean());
    }

    #[test]
    fn validate_reports_hand_built_defects() {
        let mut d = synthetic(3, 1);
        d.comments[2].id = "c0".into();
        d.comments[1].text = " ".into();
        d.comments[3].gold = None;
        let s = validate_dataset(&d, None);
        assert!(s.issues.contains(&ValidationIssue::DuplicateId {
            id: "c0".into(),
            indices: vec![0, 2]
        }));
        assert!(s.issues.contains(&ValidationIssue::EmptyText {
            id: "c1".into(),
            index: 1
        }));
        assert!(s
            .issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::MixedLabeling { unlabeled: 1, .. })));
    }

    #[test]
    fn sample_identity_and_empty() {
        let d = synthetic(80, 20);
        assert_eq!(sample(&d, d.len(), 3).unwrap(), d);
        let e = sample(&d, 0, 3).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.language_pair, d.language_pair);
        assert!(matches!(sample(&d, 101, 0), Err(CorpusError::SampleTooLarge { .. })));
    }

    #[test]
    fn sample_stratified_and_deterministic() {
        let d = synthetic(80, 20);
        let a = sample(&d, 10, 7).unwrap();
        let b = sample(&d, 10, 7).unwrap();
        assert_eq!(a, b);
        let s = validate_dataset(&a, None);
        assert_eq!((s.non_sarcastic, s.sarcastic), (8, 2));
        // order preserved relative to the source
        let positions: Vec<usize> = a
            .comments
            .iter()
            .map(|c| d.comments.iter().position(|o| o.id == c.id).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn quotas_largest_remainder() {
        assert_eq!(proportional_quotas(&[80, 20], 10), vec![8, 2]);
        assert_eq!(proportional_quotas(&[2, 1], 2), vec![1, 1]);
        assert_eq!(proportional_quotas(&[5, 0], 3), vec![3, 0]);
        assert_eq!(proportional_quotas(&[1, 1, 1], 2).iter().sum::<usize>(), 2);
    }
}
