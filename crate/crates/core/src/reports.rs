//! Scoring and discrepancy reports.
//!
//! A run directory holds `scoring.csv`, `actions.csv`, `categories.csv`,
//! `discrepancy.csv` and a machine-readable `summary.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::answer_key::ActionType;
use crate::scorer::{normalized_accuracy, CheckResult, ScoreSummary};

pub const SCORING_FILE: &str = "scoring.csv";
pub const ACTIONS_FILE: &str = "actions.csv";
pub const CATEGORIES_FILE: &str = "categories.csv";
pub const DISCREPANCY_FILE: &str = "discrepancy.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const DISCREPANCY_COLUMNS: [&str; 18] = [
    "index",
    "check_passed",
    "check_score",
    "tag_ds",
    "tag_name",
    "file_value",
    "answer_value",
    "action",
    "action_text",
    "category",
    "subcategory",
    "modality",
    "class",
    "patient",
    "study",
    "series",
    "instance",
    "file_name",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad summary file {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Rounds to four places, ties to even.
pub fn format_score(score: f64) -> String {
    format!("{:.4}", (score * 1e4).round_ties_even() / 1e4)
}

/// A percentage with two places, ties to even.
pub fn format_percent(pct: f64) -> String {
    format!("{:.2}%", (pct * 1e2).round_ties_even() / 1e2)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub fn scoring_csv(summary: &ScoreSummary) -> String {
    let o = summary.overall();
    let mut w = csv_writer();
    let row = [
        "All".to_string(),
        o.errors.to_string(),
        o.pass.to_string(),
        o.total.to_string(),
        format_percent(o.accuracy),
    ];
    w.write_record(["Category", "Errors", "Pass", "Total", "Score"]).unwrap();
    w.write_record(&row).unwrap();
    finish(w)
}

pub fn actions_csv(summary: &ScoreSummary) -> String {
    let mut w = csv_writer();
    w.write_record(["Action Type", "Errors", "Pass", "Total"]).unwrap();
    let (mut e, mut p, mut t) = (0, 0, 0);
    for (a, s) in summary.actions() {
        e += s.errors;
        p += s.pass;
        t += s.total;
        w.write_record([a.as_str().to_string(), s.errors.to_string(), s.pass.to_string(), s.total.to_string()])
            .unwrap();
    }
    w.write_record(["Total".to_string(), e.to_string(), p.to_string(), t.to_string()])
        .unwrap();
    finish(w)
}

pub fn categories_csv(summary: &ScoreSummary) -> String {
    let mut w = csv_writer();
    w.write_record(["Category", "Subcategory", "Fail", "Pass", "Total"]).unwrap();
    let (mut f, mut p, mut t) = (0, 0, 0);
    for (cat, sub, s) in summary.categories() {
        f += s.fail;
        p += s.pass;
        t += s.total;
        w.write_record([cat, sub, &s.fail.to_string(), &s.pass.to_string(), &s.total.to_string()])
            .unwrap();
    }
    w.write_record(["Total", "", &f.to_string(), &p.to_string(), &t.to_string()])
        .unwrap();
    finish(w)
}

/// Failed checks sorted by (patient, study, series, instance, tag_ds),
/// indexed from 0. Passed checks are skipped.
pub fn discrepancy_csv(results: &[CheckResult<'_>]) -> String {
    let mut failed: Vec<&CheckResult<'_>> = results.iter().filter(|r| !r.check_passed).collect();
    failed.sort_by_cached_key(|r| {
        let e = r.entry;
        (
            e.patient.clone(),
            e.study.clone(),
            e.series.clone(),
            e.instance.clone(),
            e.tag_ds.to_string(),
        )
    });
    let mut w = csv_writer();
    w.write_record(DISCREPANCY_COLUMNS).unwrap();
    for (i, r) in failed.iter().enumerate() {
        let e = r.entry;
        w.write_record([
            i.to_string(),
            "0".to_string(),
            format_score(r.check_score),
            e.tag_ds.to_string(),
            e.tag_name.clone(),
            r.file_value.clone(),
            e.answer_value.clone(),
            e.action.to_string(),
            e.action_text.join(";"),
            e.category.to_string(),
            e.subcategory.clone(),
            e.modality.clone(),
            e.class.clone(),
            e.patient.clone(),
            e.study.clone(),
            e.series.clone(),
            e.instance.clone(),
            e.file_name.clone(),
        ])
        .unwrap();
    }
    finish(w)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), ReportError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| ReportError::Io { path, source })
}

fn ensure_dir(dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes the three scoring sheets into `dir`.
pub fn write_scoring_report(summary: &ScoreSummary, dir: &Path) -> Result<(), ReportError> {
    ensure_dir(dir)?;
    write(dir, SCORING_FILE, &scoring_csv(summary))?;
    write(dir, ACTIONS_FILE, &actions_csv(summary))?;
    write(dir, CATEGORIES_FILE, &categories_csv(summary))
}

pub fn write_discrepancy_report(results: &[CheckResult<'_>], dir: &Path) -> Result<(), ReportError> {
    ensure_dir(dir)?;
    write(dir, DISCREPANCY_FILE, &discrepancy_csv(results))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionLine {
    pub action: ActionType,
    pub errors: u64,
    pub pass: u64,
    pub total: u64,
    pub score_sum: f64,
}

/// The figures printed after a scoring run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub errors: u64,
    pub pass: u64,
    pub total: u64,
    pub overall: f64,
    pub normalized: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted: Option<f64>,
    pub missing_instances: Vec<String>,
    pub actions: Vec<ActionLine>,
}

impl RunSummary {
    pub fn new(summary: &ScoreSummary, weighted: Option<f64>, missing: &[String]) -> Self {
        let o = summary.overall();
        RunSummary {
            mode: summary.mode.as_str().to_string(),
            errors: o.errors,
            pass: o.pass,
            total: o.total,
            overall: o.accuracy,
            normalized: normalized_accuracy(summary),
            weighted,
            missing_instances: missing.to_vec(),
            actions: summary
                .actions()
                .map(|(action, s)| ActionLine {
                    action,
                    errors: s.errors,
                    pass: s.pass,
                    total: s.total,
                    score_sum: s.score_sum,
                })
                .collect(),
        }
    }

    /// `overall=XX.XX% normalized=XX.XX%`, plus `weighted=` when set.
    pub fn headline(&self) -> String {
        let mut s = format!(
            "overall={} normalized={}",
            format_percent(self.overall),
            format_percent(self.normalized)
        );
        if let Some(w) = self.weighted {
            s.push_str(&format!(" weighted={}", format_percent(w)));
        }
        s
    }
}

pub fn write_run_summary(summary: &RunSummary, dir: &Path) -> Result<(), ReportError> {
    ensure_dir(dir)?;
    let body = serde_json::to_string_pretty(summary).expect("summary serializes");
    write(dir, SUMMARY_FILE, &(body + "\n"))
}

pub fn read_run_summary(dir: &Path) -> Result<RunSummary, ReportError> {
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json { path, source })
}
