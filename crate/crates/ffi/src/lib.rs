//! C ABI over `codemix-sarcasm`.
//!
//! Every fallible function returns a [`CmsStatus`]. On failure a message is
//! available from [`cms_last_error`] on the same thread until the next
//! failing call. Strings returned through `char **` out-parameters are owned
//! by the caller and must be released with [`cms_string_free`]; handles are
//! released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use codemix_sarcasm::corpus::{self, Dataset};
use codemix_sarcasm::metrics::{self, Candidate, ClassificationReport, ConfusionMatrix, PublishedReport, PublishedRow};
use codemix_sarcasm::parse::{parse_label, ParseOutcome};
use codemix_sarcasm::prompt::default_template;
use codemix_sarcasm::{Label, LanguagePair};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    InvalidData = 5,
    Inconsistent = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmsLanguage {
    TamilEnglish = 0,
    MalayalamEnglish = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmsLabel {
    NonSarcastic = 0,
    Sarcastic = 1,
    /// Returned by [`cms_parse_label`] when neither label is recognized.
    Unparseable = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmsAverage {
    Micro = 0,
    Macro = 1,
    Weighted = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CmsScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Printed report to reconstruct from. Rows are Non-sarcastic, Sarcastic,
/// micro, macro, weighted; columns precision, recall, F1. A NaN cell is
/// unconstrained.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CmsPublishedReport {
    pub supports: [u64; 2],
    pub cells: [[f64; 3]; 5],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CmsCandidate {
    pub nn: u64,
    pub ns: u64,
    pub sn: u64,
    pub ss: u64,
    pub residual: f64,
}

/// Opaque classification report.
pub struct CmsReport(ClassificationReport);

/// Opaque list of reconstruction candidates, best first.
pub struct CmsCandidates(Vec<Candidate>);

/// Opaque loaded dataset.
pub struct CmsDataset(Dataset);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|b| *b != 0);
    let c = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (CmsStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CmsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CmsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CmsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (CmsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (CmsStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (CmsStatus::InvalidData, "string contains an interior nul byte".into()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn language(l: CmsLanguage) -> LanguagePair {
    match l {
        CmsLanguage::TamilEnglish => LanguagePair::TamilEnglish,
        CmsLanguage::MalayalamEnglish => LanguagePair::MalayalamEnglish,
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cms_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cms_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Half-up rounding on the shortest decimal representation of `x`.
#[no_mangle]
pub extern "C" fn cms_round_half_up(x: f64, places: u32) -> f64 {
    metrics::round_half_up(x, places)
}

/// # Safety
/// `raw` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_parse_label(raw: *const c_char, out: *mut CmsLabel) -> CmsStatus {
    guard(|| {
        let raw = read_str(raw, "raw")?;
        let label = match parse_label(raw) {
            ParseOutcome::Parsed {
                label: Label::NonSarcastic,
            } => CmsLabel::NonSarcastic,
            ParseOutcome::Parsed {
                label: Label::Sarcastic,
            } => CmsLabel::Sarcastic,
            ParseOutcome::Unparseable { .. } => CmsLabel::Unparseable,
        };
        write_out(out, label, "out")
    })
}

/// Renders the default zero-shot prompt for `text`.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_render_default_prompt(
    lang: CmsLanguage,
    text: *const c_char,
    out: *mut *mut c_char,
) -> CmsStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let prompt = default_template(language(lang))
            .render(text)
            .map_err(|e| (CmsStatus::InvalidArgument, e.to_string()))?;
        write_out(out, into_c_string(prompt)?, "out")
    })
}

/// Builds a report from confusion counts (gold-major).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_report_from_counts(
    nn: u64,
    ns: u64,
    sn: u64,
    ss: u64,
    out: *mut *mut CmsReport,
) -> CmsStatus {
    guard(|| {
        let r = metrics::report(&ConfusionMatrix::from_cells(nn, ns, sn, ss))
            .map_err(|e| (CmsStatus::InvalidArgument, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(CmsReport(r))), "out")
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_report_class(report: *const CmsReport, label: CmsLabel, out: *mut CmsScores) -> CmsStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        let label = match label {
            CmsLabel::NonSarcastic => Label::NonSarcastic,
            CmsLabel::Sarcastic => Label::Sarcastic,
            CmsLabel::Unparseable => {
                return Err((CmsStatus::InvalidArgument, "no scores for an unparseable label".into()))
            }
        };
        let c = r.class(label);
        write_out(
            out,
            CmsScores {
                precision: c.precision,
                recall: c.recall,
                f1: c.f1,
                support: c.support,
            },
            "out",
        )
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_report_average(
    report: *const CmsReport,
    kind: CmsAverage,
    out: *mut CmsScores,
) -> CmsStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        let a = match kind {
            CmsAverage::Micro => r.micro,
            CmsAverage::Macro => r.macro_avg,
            CmsAverage::Weighted => r.weighted,
        };
        write_out(
            out,
            CmsScores {
                precision: a.precision,
                recall: a.recall,
                f1: a.f1,
                support: r.total_support,
            },
            "out",
        )
    })
}

/// Pretty JSON for the report.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_report_to_json(report: *const CmsReport, out: *mut *mut c_char) -> CmsStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        write_out(out, into_c_string(r.to_json())?, "out")
    })
}

/// The fixed-width text table.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_report_to_text(report: *const CmsReport, out: *mut *mut c_char) -> CmsStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        write_out(out, into_c_string(r.to_string())?, "out")
    })
}

/// # Safety
/// `report` must be null or a handle from [`cms_report_from_counts`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cms_report_free(report: *mut CmsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn published(t: &CmsPublishedReport) -> PublishedReport {
    let cell = |v: f64| (!v.is_nan()).then_some(v);
    let row = |r: [f64; 3]| PublishedRow {
        precision: cell(r[0]),
        recall: cell(r[1]),
        f1: cell(r[2]),
    };
    PublishedReport {
        supports: t.supports,
        per_class: [row(t.cells[0]), row(t.cells[1])],
        micro: row(t.cells[2]),
        macro_avg: row(t.cells[3]),
        weighted: row(t.cells[4]),
    }
}

/// Every integer matrix consistent with `target` within `tolerance`.
/// Returns `Inconsistent` when none exists.
///
/// # Safety
/// `target` must point to a valid struct; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_reconstruct(
    target: *const CmsPublishedReport,
    tolerance: f64,
    out: *mut *mut CmsCandidates,
) -> CmsStatus {
    guard(|| {
        let target = published(handle(target, "target")?);
        let found = metrics::reconstruct(&target, tolerance).map_err(|e| match e {
            metrics::MetricsError::InconsistentReport => (CmsStatus::Inconsistent, e.to_string()),
            other => (CmsStatus::InvalidArgument, other.to_string()),
        })?;
        write_out(out, Box::into_raw(Box::new(CmsCandidates(found))), "out")
    })
}

/// Number of candidates; 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cms_candidates_len(c: *const CmsCandidates) -> usize {
    c.as_ref().map_or(0, |c| c.0.len())
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_candidates_get(
    c: *const CmsCandidates,
    index: usize,
    out: *mut CmsCandidate,
) -> CmsStatus {
    guard(|| {
        let list = &handle(c, "candidates")?.0;
        let cand = list.get(index).ok_or_else(|| {
            (
                CmsStatus::InvalidArgument,
                format!("index {index} out of range (len {})", list.len()),
            )
        })?;
        let m = cand.matrix.counts;
        write_out(
            out,
            CmsCandidate {
                nn: m[0][0],
                ns: m[0][1],
                sn: m[1][0],
                ss: m[1][1],
                residual: cand.residual,
            },
            "out",
        )
    })
}

/// # Safety
/// `c` must be null or a handle from [`cms_reconstruct`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cms_candidates_free(c: *mut CmsCandidates) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Loads a TSV dataset.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_dataset_load(
    path: *const c_char,
    lang: CmsLanguage,
    out: *mut *mut CmsDataset,
) -> CmsStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let d = corpus::load_dataset(path, language(lang)).map_err(|e| {
            let status = match e {
                corpus::CorpusError::Io { .. } => CmsStatus::Io,
                _ => CmsStatus::InvalidData,
            };
            (status, e.to_string())
        })?;
        write_out(out, Box::into_raw(Box::new(CmsDataset(d))), "out")
    })
}

/// Number of comments; 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cms_dataset_len(d: *const CmsDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Validation summary as JSON. A negative `expected_count` skips the count
/// check.
///
/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cms_dataset_validate_json(
    d: *const CmsDataset,
    expected_count: i64,
    out: *mut *mut c_char,
) -> CmsStatus {
    guard(|| {
        let d = &handle(d, "dataset")?.0;
        let expected = usize::try_from(expected_count).ok();
        let summary = corpus::validate_dataset(d, expected);
        write_out(out, into_c_string(summary.to_json())?, "out")
    })
}

/// # Safety
/// `d` must be null or a handle from [`cms_dataset_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cms_dataset_free(d: *mut CmsDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}
