//! Command-line interface. Exit codes: 0 success, 1 user or data error,
//! 2 terminal backend error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backend::{ChatBackend, MockBackend, RemoteBackend};
use crate::corpus::{self, LanguagePair};
use crate::metrics::{self, ConfusionMatrix, PublishedReport, PublishedRow, DEFAULT_TOLERANCE};
use crate::runner::{self, ExperimentConfig, ExperimentResult, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_BACKEND: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "codemix-sarcasm",
    version,
    about = "Zero-shot sarcasm classification harness and exact metrics toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a TSV dataset and print per-label counts.
    Validate {
        dataset: PathBuf,
        #[arg(long, default_value = "tamil-english", value_parser = parse_language)]
        language: LanguagePair,
        /// Expected number of comments.
        #[arg(long = "expect")]
        expect: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Classify a dataset at one temperature.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Defaults to the first configured temperature.
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Classify a dataset at every configured temperature.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Score a predictions file against gold labels.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "tamil-english", value_parser = parse_language)]
        language: LanguagePair,
        /// Where to write the JSON report [default: <predictions>.report.json].
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Find integer confusion matrices consistent with a rounded report.
    Reconstruct(ReconstructArgs),
    /// Print a classification report for a matrix or a saved result.
    Report {
        /// Cells NN,NS,SN,SS (gold-major).
        #[arg(long, value_parser = parse_matrix, conflicts_with = "result", required_unless_present = "result")]
        matrix: Option<ConfusionMatrix>,
        /// A result.json written by `run` or `sweep`.
        #[arg(long)]
        result: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
    pub backend: BackendKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mock,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Tamil-English published report (supports 4621/1717).
    Tamil,
    /// Malayalam-English published report (supports 2314/512).
    Malayalam,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Gold supports N,S.
    #[arg(long, value_parser = parse_supports)]
    pub supports: Option<[u64; 2]>,
    /// Non-sarcastic row: P,R or P,R,F1.
    #[arg(long, value_parser = parse_class_row)]
    pub non_sarcastic: Option<PublishedRow>,
    /// Sarcastic row: P,R or P,R,F1.
    #[arg(long, value_parser = parse_class_row)]
    pub sarcastic: Option<PublishedRow>,
    /// Micro average (single value).
    #[arg(long)]
    pub micro: Option<f64>,
    /// Macro average P,R,F1.
    #[arg(long = "macro", value_parser = parse_average_row)]
    pub macro_avg: Option<PublishedRow>,
    /// Weighted average P,R,F1.
    #[arg(long, value_parser = parse_average_row)]
    pub weighted: Option<PublishedRow>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Number of candidates to print.
    #[arg(long, default_value_t = 10)]
    pub limit: usize,
    #[arg(long)]
    pub json: bool,
}

fn parse_language(s: &str) -> Result<LanguagePair, String> {
    s.parse()
}

/// Published report for a preset language pair.
pub fn preset_report(preset: Preset) -> PublishedReport {
    match preset {
        Preset::Tamil => PublishedReport {
            supports: [4621, 1717],
            per_class: [PublishedRow::new(0.79, 0.79, 0.79), PublishedRow::new(0.43, 0.43, 0.43)],
            micro: PublishedRow::uniform(0.69),
            macro_avg: PublishedRow::uniform(0.61),
            weighted: PublishedRow::uniform(0.69),
        },
        Preset::Malayalam => PublishedReport {
            supports: [2314, 512],
            per_class: [PublishedRow::new(0.82, 0.73, 0.77), PublishedRow::new(0.18, 0.27, 0.22)],
            micro: PublishedRow::uniform(0.65),
            macro_avg: PublishedRow::uniform(0.50),
            weighted: PublishedRow::new(0.70, 0.65, 0.67),
        },
    }
}

fn comma_list<T: std::str::FromStr>(s: &str, lens: std::ops::RangeInclusive<usize>) -> Result<Vec<T>, String> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<T>().map_err(|_| format!("invalid number {v:?}")))
        .collect::<Result<Vec<T>, String>>()?;
    if !lens.contains(&values.len()) {
        return Err(if lens.start() == lens.end() {
            format!("expected {} comma-separated values", lens.start())
        } else {
            format!("expected {} to {} comma-separated values", lens.start(), lens.end())
        });
    }
    Ok(values)
}

fn parse_matrix(s: &str) -> Result<ConfusionMatrix, String> {
    let v = comma_list::<u64>(s, 4..=4)?;
    Ok(ConfusionMatrix::from_cells(v[0], v[1], v[2], v[3]))
}

fn parse_supports(s: &str) -> Result<[u64; 2], String> {
    let v = comma_list::<u64>(s, 2..=2)?;
    Ok([v[0], v[1]])
}

fn row_from(values: &[f64]) -> PublishedRow {
    PublishedRow {
        precision: values.first().copied(),
        recall: values.get(1).copied(),
        f1: values.get(2).copied(),
    }
}

fn parse_class_row(s: &str) -> Result<PublishedRow, String> {
    comma_list::<f64>(s, 2..=3).map(|v| row_from(&v))
}

fn parse_average_row(s: &str) -> Result<PublishedRow, String> {
    comma_list::<f64>(s, 3..=3).map(|v| row_from(&v))
}

impl ReconstructArgs {
    fn target(&self) -> Result<PublishedReport, String> {
        let mut t = match self.preset {
            Some(p) => preset_report(p),
            None => PublishedReport {
                supports: [0, 0],
                per_class: [PublishedRow::default(); 2],
                micro: PublishedRow::default(),
                macro_avg: PublishedRow::default(),
                weighted: PublishedRow::default(),
            },
        };
        match (&self.supports, self.preset) {
            (Some(s), _) => t.supports = *s,
            (None, None) => return Err("--supports is required without --preset".into()),
            (None, Some(_)) => {}
        }
        if let Some(row) = self.non_sarcastic {
            t.per_class[0] = row;
        }
        if let Some(row) = self.sarcastic {
            t.per_class[1] = row;
        }
        if let Some(v) = self.micro {
            t.micro = PublishedRow::uniform(v);
        }
        if let Some(row) = self.macro_avg {
            t.macro_avg = row;
        }
        if let Some(row) = self.weighted {
            t.weighted = row;
        }
        Ok(t)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

type CmdResult = Result<i32, (i32, String)>;

fn user_err(e: impl std::fmt::Display) -> (i32, String) {
    (EXIT_USER, e.to_string())
}

fn run_err(e: RunError) -> (i32, String) {
    let code = match e {
        RunError::Backend { .. } => EXIT_BACKEND,
        _ => EXIT_USER,
    };
    (code, e.to_string())
}

fn execute(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate {
            dataset,
            language,
            expect,
            json,
        } => cmd_validate(&dataset, language, expect, json, out),
        Command::Run { exp, temperature } => cmd_run(&exp, temperature, out),
        Command::Sweep { exp } => cmd_sweep(&exp, out),
        Command::Score {
            gold,
            predictions,
            language,
            json_out,
        } => cmd_score(&gold, &predictions, language, json_out, out),
        Command::Reconstruct(args) => cmd_reconstruct(&args, out),
        Command::Report { matrix, result, json } => cmd_report(matrix, result, json, out),
    }
}

fn cmd_validate(
    path: &Path,
    language: LanguagePair,
    expect: Option<usize>,
    json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let dataset = corpus::load_dataset(path, language).map_err(user_err)?;
    let summary = corpus::validate_dataset(&dataset, expect);
    if json {
        writeln!(out, "{}", summary.to_json()).map_err(user_err)?;
    } else {
        writeln!(out, "{summary}").map_err(user_err)?;
    }
    Ok(if summary.is_clean() { EXIT_OK } else { EXIT_USER })
}

fn build_backend(cfg: &ExperimentConfig, kind: BackendKind) -> Result<Box<dyn ChatBackend>, (i32, String)> {
    match kind {
        BackendKind::Mock => Ok(Box::new(MockBackend::new(cfg.mock_config()))),
        BackendKind::Remote => RemoteBackend::from_env(cfg.remote_config())
            .map(|b| Box::new(b) as Box<dyn ChatBackend>)
            .map_err(user_err),
    }
}

fn summarize(result: &ExperimentResult, dir: &Path, out: &mut dyn Write) -> std::io::Result<()> {
    let c = &result.counts;
    writeln!(
        out,
        "temperature {}: {} comments, {} parsed, {} unparseable, {} excluded, {} cache hits -> {}",
        result.temperature,
        c.total,
        c.parsed,
        c.unparseable,
        c.excluded,
        result.provenance.cache_hits,
        dir.display()
    )?;
    if let Some(r) = &result.report {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

fn cmd_run(exp: &ExperimentArgs, temperature: Option<f64>, out: &mut dyn Write) -> CmdResult {
    let cfg = ExperimentConfig::load(&exp.config).map_err(run_err)?;
    let backend = build_backend(&cfg, exp.backend)?;
    let t = temperature.unwrap_or(cfg.temperatures[0]);
    let result = runner::run_experiment(&cfg, t, backend.as_ref()).map_err(run_err)?;
    summarize(&result, &cfg.output_dir(), out).map_err(user_err)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(exp: &ExperimentArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = ExperimentConfig::load(&exp.config).map_err(run_err)?;
    let backend = build_backend(&cfg, exp.backend)?;
    match runner::sweep(&cfg, backend.as_ref()) {
        Ok(results) => {
            for r in &results {
                let dir = cfg.output_dir().join(runner::temperature_dir_name(r.temperature));
                summarize(r, &dir, out).map_err(user_err)?;
            }
            Ok(EXIT_OK)
        }
        Err(e) => {
            for r in &e.completed {
                let dir = cfg.output_dir().join(runner::temperature_dir_name(r.temperature));
                summarize(r, &dir, out).map_err(user_err)?;
            }
            Err(run_err(e.error))
        }
    }
}

fn cmd_score(
    gold: &Path,
    predictions: &Path,
    language: LanguagePair,
    json_out: Option<PathBuf>,
    out: &mut dyn Write,
) -> CmdResult {
    let gold = corpus::load_dataset(gold, language).map_err(user_err)?;
    let preds = runner::load_predictions(predictions).map_err(user_err)?;
    let scored = runner::score_predictions(&gold, &preds).map_err(user_err)?;
    writeln!(out, "{}", scored.report).map_err(user_err)?;
    if scored.excluded > 0 {
        writeln!(out, "excluded from scoring: {}", scored.excluded).map_err(user_err)?;
    }
    let json_path = json_out.unwrap_or_else(|| predictions.with_extension("report.json"));
    let json = serde_json::to_string_pretty(&scored).expect("score serializes") + "\n";
    crate::backend::cache::write_atomic(&json_path, json.as_bytes())
        .map_err(|e| user_err(format!("{}: {e}", json_path.display())))?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct(args: &ReconstructArgs, out: &mut dyn Write) -> CmdResult {
    let target = args.target().map_err(user_err)?;
    let candidates = metrics::reconstruct(&target, args.tolerance).map_err(user_err)?;
    if args.json {
        let shown: Vec<_> = candidates.iter().take(args.limit).collect();
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&shown).expect("candidates serialize")
        )
        .map_err(user_err)?;
        return Ok(EXIT_OK);
    }
    writeln!(
        out,
        "{} matrix(es) within tolerance {}; showing {}",
        candidates.len(),
        args.tolerance,
        candidates.len().min(args.limit)
    )
    .map_err(user_err)?;
    for (rank, c) in candidates.iter().take(args.limit).enumerate() {
        let r = metrics::report(&c.matrix).expect("candidate has positive total");
        writeln!(
            out,
            "#{:<3} {}  residual {:.6}  macro-F1 {:.4}  micro {:.4}",
            rank + 1,
            c.matrix,
            c.residual,
            r.macro_avg.f1,
            r.micro.f1
        )
        .map_err(user_err)?;
    }
    Ok(EXIT_OK)
}

fn cmd_report(matrix: Option<ConfusionMatrix>, result: Option<PathBuf>, json: bool, out: &mut dyn Write) -> CmdResult {
    let report = match (matrix, result) {
        (Some(m), _) => metrics::report(&m).map_err(user_err)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path).map_err(|e| user_err(format!("{}: {e}", path.display())))?;
            let result: ExperimentResult =
                serde_json::from_str(&text).map_err(|e| user_err(format!("{}: {e}", path.display())))?;
            result
                .report
                .ok_or_else(|| user_err(format!("{}: result has no classification report", path.display())))?
        }
        (None, None) => return Err(user_err("either --matrix or --result is required")),
    };
    if json {
        writeln!(out, "{}", report.to_json()).map_err(user_err)?;
    } else {
        writeln!(out, "{report}").map_err(user_err)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_cli(
            std::iter::once("codemix-sarcasm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let (code, _, err) = cli(&["frobnicate"]);
        assert_eq!(code, EXIT_USER);
        assert!(err.contains("frobnicate"));
        assert_eq!(cli(&["validate", "x.tsv", "--bogus"]).0, EXIT_USER);
        assert_eq!(cli(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn report_from_matrix() {
        let (code, out, _) = cli(&["report", "--matrix", "3651,970,977,740"]);
        assert_eq!(code, 0);
        assert!(out.contains("Macro avg           0.61    0.61      0.61     6338"));
    }

    #[test]
    fn reconstruct_perfect_and_infeasible() {
        let (code, out, _) = cli(&[
            "reconstruct",
            "--supports",
            "5,5",
            "--non-sarcastic",
            "1.00,1.00,1.00",
            "--sarcastic",
            "1.00,1.00,1.00",
            "--micro",
            "1.00",
            "--macro",
            "1.00,1.00,1.00",
            "--weighted",
            "1.00,1.00,1.00",
        ]);
        assert_eq!(code, 0);
        assert!(out.starts_with("1 matrix(es)"));
        assert!(out.contains("NN=5 NS=0 SN=0 SS=5"));

        let (code, _, err) = cli(&[
            "reconstruct",
            "--supports",
            "5,5",
            "--non-sarcastic",
            "1.00,1.00",
            "--sarcastic",
            "1.00,0.50",
        ]);
        assert_eq!(code, EXIT_USER);
        assert!(err.contains("inconsistent report"));
        assert_eq!(cli(&["reconstruct", "--micro", "0.5"]).0, EXIT_USER);
    }

    #[test]
    fn presets_reconstruct() {
        for preset in ["tamil", "malayalam"] {
            let (code, out, _) = cli(&["reconstruct", "--preset", preset, "--limit", "3"]);
            assert_eq!(code, 0, "{preset}");
            assert!(out.contains("#1"));
        }
    }
}
