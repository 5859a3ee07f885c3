//! Scoring a de-identified corpus against an answer key.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use chrono::NaiveDate;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::answer_key::{
    subcategory_index, ActionType, AnswerKey, AnswerKeyEntry, MappingTable, PixelBox,
    SUBCATEGORIES,
};
use crate::deid::{is_date_like, list_dicom_files};
use crate::dicom::{read_file, DicomError, DicomFile, PixelGeometry};
use crate::tokens;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("instance {instance} ({file_name}) is not in the originals directory")]
    KeyCorpusMismatch { instance: String, file_name: String },
    #[error("cannot read original {path}: {source}")]
    Original {
        path: PathBuf,
        #[source]
        source: DicomError,
    },
    #[error("cannot list {path}: {msg}")]
    Listing { path: PathBuf, msg: String },
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AggregationMode {
    #[default]
    Series,
    Instance,
}

impl AggregationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMode::Series => "series",
            AggregationMode::Instance => "instance",
        }
    }
}

impl std::str::FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "series" | "series_based" => Ok(AggregationMode::Series),
            "instance" | "instance_based" => Ok(AggregationMode::Instance),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult<'k> {
    pub entry: &'k AnswerKeyEntry,
    pub check_passed: bool,
    pub check_score: f64,
    pub file_value: String,
}

impl<'k> CheckResult<'k> {
    fn new(entry: &'k AnswerKeyEntry, score: f64, file_value: String) -> Self {
        let check_score = score.clamp(0.0, 1.0);
        CheckResult {
            entry,
            check_passed: check_score == 1.0,
            check_score,
            file_value,
        }
    }

    fn binary(entry: &'k AnswerKeyEntry, pass: bool, file_value: String) -> Self {
        Self::new(entry, if pass { 1.0 } else { 0.0 }, file_value)
    }
}

/// True if `token` occurs in `value` as a run of whole tokens. Tokens that
/// contain delimiters match as a contiguous token sequence.
pub fn token_occurs(value: &str, token: &str) -> bool {
    let needle: Vec<&str> = tokens::split(token).collect();
    if needle.is_empty() {
        return false;
    }
    let hay: Vec<&str> = tokens::split(value).collect();
    hay.windows(needle.len()).any(|w| w == needle.as_slice())
}

fn pixel_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A box is hidden when every sample inside it, across all frames, holds
/// one value.
pub fn box_is_hidden(data: &[u8], geom: &PixelGeometry, b: &PixelBox) -> bool {
    if b.x1 > geom.columns || b.y1 > geom.rows || data.len() < geom.expected_len() {
        return false;
    }
    let first = geom.sample(data, 0, b.x0, b.y0);
    (0..geom.frames).all(|f| {
        (b.y0..b.y1).all(|y| (b.x0..b.x1).all(|x| geom.sample(data, f, x, y) == first))
    })
}

/// Scores one key entry. `submitted` is `None` when the instance is missing
/// from the submission, which scores 0.
pub fn check_entry<'k>(
    entry: &'k AnswerKeyEntry,
    original: &DicomFile,
    submitted: Option<&DicomFile>,
    patid_map: &MappingTable,
    uid_map: &MappingTable,
) -> CheckResult<'k> {
    let Some(sub) = submitted else {
        return CheckResult::binary(entry, false, String::new());
    };
    let element = sub.dataset.get_path(&entry.tag_ds);
    let text = element.map(|e| e.to_text()).unwrap_or_default();
    let answer = entry.answer_value.trim();
    match entry.action {
        ActionType::DateShifted => {
            let shifted = !text.is_empty()
                && text.split('\\').all(is_date_like)
                && text != answer;
            CheckResult::binary(entry, shifted, text)
        }
        ActionType::PatidConsistent => {
            let pass = patid_map.get(answer).is_some_and(|m| m == text);
            CheckResult::binary(entry, pass, text)
        }
        ActionType::UidChanged => {
            CheckResult::binary(entry, !text.is_empty() && text != answer, text)
        }
        ActionType::UidConsistent => {
            let pass = uid_map.get(answer).is_some_and(|m| m == text);
            CheckResult::binary(entry, pass, text)
        }
        ActionType::TagRetained => CheckResult::binary(entry, element.is_some(), text),
        ActionType::TextNotnull => {
            CheckResult::binary(entry, element.is_some_and(|e| !e.is_empty()), text)
        }
        ActionType::TextRemoved | ActionType::TextRetained => {
            let total = entry.action_text.len();
            let present = entry
                .action_text
                .iter()
                .filter(|t| token_occurs(&text, t))
                .count();
            let good = if entry.action == ActionType::TextRemoved {
                total - present
            } else {
                present
            };
            let score = if total == 0 { 1.0 } else { good as f64 / total as f64 };
            CheckResult::new(entry, score, text)
        }
        ActionType::PixelsRetained => {
            let sub_px = element.and_then(|e| e.as_bytes());
            let orig_px = original
                .dataset
                .get_path(&entry.tag_ds)
                .and_then(|e| e.as_bytes());
            let pass = matches!((sub_px, orig_px), (Some(a), Some(b)) if a == b);
            CheckResult::binary(entry, pass, sub_px.map(pixel_digest).unwrap_or_default())
        }
        ActionType::PixelsHidden => {
            let sub_px = element.and_then(|e| e.as_bytes());
            let hidden = match (sub_px, PixelGeometry::from_dataset(&sub.dataset)) {
                (Some(data), Some(geom)) => entry
                    .region
                    .iter()
                    .filter(|b| box_is_hidden(data, &geom, b))
                    .count(),
                _ => 0,
            };
            let score = hidden as f64 / entry.region.len().max(1) as f64;
            CheckResult::new(entry, score, sub_px.map(pixel_digest).unwrap_or_default())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionStats {
    pub errors: u64,
    pub pass: u64,
    pub total: u64,
    pub score_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CategoryStats {
    pub fail: u64,
    pub pass: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overall {
    pub errors: u64,
    pub pass: u64,
    pub total: u64,
    /// Percentage.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSummary {
    pub mode: AggregationMode,
    per_action: [ActionStats; 10],
    per_category: [CategoryStats; 25],
}

impl ScoreSummary {
    pub fn new(mode: AggregationMode) -> Self {
        ScoreSummary {
            mode,
            per_action: [ActionStats::default(); 10],
            per_category: [CategoryStats::default(); 25],
        }
    }

    pub fn from_results(mode: AggregationMode, results: &[CheckResult<'_>]) -> Self {
        let mut s = Self::new(mode);
        for r in results {
            s.add(r);
        }
        s
    }

    /// A summary built from per-action error and total counts, each error
    /// taken as a full miss. Categories stay at zero.
    pub fn from_action_counts(mode: AggregationMode, counts: &[(ActionType, u64, u64)]) -> Self {
        let mut s = Self::new(mode);
        for &(a, errors, total) in counts {
            let row = &mut s.per_action[a as usize];
            row.errors += errors;
            row.total += total;
            row.pass += total - errors;
            row.score_sum += (total - errors) as f64;
        }
        s
    }

    pub fn add(&mut self, r: &CheckResult<'_>) {
        let row = &mut self.per_action[r.entry.action as usize];
        row.total += 1;
        row.score_sum += r.check_score;
        if r.check_passed {
            row.pass += 1;
        } else {
            row.errors += 1;
        }
        if let Some(i) = subcategory_index(r.entry.category, &r.entry.subcategory) {
            let c = &mut self.per_category[i];
            c.total += 1;
            if r.check_passed {
                c.pass += 1;
            } else {
                c.fail += 1;
            }
        }
    }

    /// Adds another partial summary of the same mode.
    pub fn merge(&mut self, other: &ScoreSummary) {
        for (a, b) in self.per_action.iter_mut().zip(&other.per_action) {
            a.errors += b.errors;
            a.pass += b.pass;
            a.total += b.total;
            a.score_sum += b.score_sum;
        }
        for (a, b) in self.per_category.iter_mut().zip(&other.per_category) {
            a.fail += b.fail;
            a.pass += b.pass;
            a.total += b.total;
        }
    }

    pub fn action(&self, a: ActionType) -> ActionStats {
        self.per_action[a as usize]
    }

    /// Rows in report order.
    pub fn actions(&self) -> impl Iterator<Item = (ActionType, ActionStats)> + '_ {
        ActionType::ALL.into_iter().map(|a| (a, self.per_action[a as usize]))
    }

    /// Rows in taxonomy order, zero rows included.
    pub fn categories(&self) -> impl Iterator<Item = (&'static str, &'static str, CategoryStats)> + '_ {
        SUBCATEGORIES
            .iter()
            .zip(&self.per_category)
            .map(|(&(c, s), &st)| (c.as_str(), s, st))
    }

    pub fn overall(&self) -> Overall {
        let (mut errors, mut pass, mut total, mut sum) = (0, 0, 0, 0.0);
        for a in &self.per_action {
            errors += a.errors;
            pass += a.pass;
            total += a.total;
            sum += a.score_sum;
        }
        let accuracy = if total == 0 { 0.0 } else { 100.0 * sum / total as f64 };
        Overall {
            errors,
            pass,
            total,
            accuracy,
        }
    }
}

/// Mean per-type accuracy over types that have entries, as a percentage.
pub fn normalized_accuracy(summary: &ScoreSummary) -> f64 {
    let rates: Vec<f64> = summary
        .actions()
        .filter(|(_, s)| s.total > 0)
        .map(|(_, s)| s.score_sum / s.total as f64)
        .collect();
    if rates.is_empty() {
        0.0
    } else {
        100.0 * rates.iter().sum::<f64>() / rates.len() as f64
    }
}

/// Weighted per-type accuracy. Weights must be non-negative, sum to 1 and
/// put no positive weight on a type without entries.
pub fn weighted_accuracy(
    summary: &ScoreSummary,
    weights: &BTreeMap<ActionType, f64>,
) -> Result<f64, ScoreError> {
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ScoreError::BadWeights(format!("weights sum to {sum}, not 1")));
    }
    let mut acc = 0.0;
    for (&a, &w) in weights {
        if !w.is_finite() || w < 0.0 {
            return Err(ScoreError::BadWeights(format!("weight {w} for {a}")));
        }
        let s = summary.action(a);
        if s.total == 0 {
            if w > 0.0 {
                return Err(ScoreError::BadWeights(format!("{a} has weight {w} but no entries")));
            }
            continue;
        }
        acc += w * s.score_sum / s.total as f64;
    }
    Ok(100.0 * acc)
}

/// Collapses instance results to one result per
/// (series, tag_ds, action, answer_value) group, keeping the lowest score.
pub fn group_by_series<'k>(results: &[CheckResult<'k>]) -> Vec<CheckResult<'k>> {
    let mut slot: HashMap<(&str, String, ActionType, &str), usize> = HashMap::new();
    let mut groups: Vec<CheckResult<'k>> = Vec::new();
    for r in results {
        let e = r.entry;
        let k = (e.series.as_str(), e.tag_ds.to_string(), e.action, e.answer_value.as_str());
        match slot.get(&k) {
            Some(&i) => {
                if r.check_score < groups[i].check_score {
                    groups[i] = r.clone();
                }
            }
            None => {
                slot.insert(k, groups.len());
                groups.push(r.clone());
            }
        }
    }
    groups
}

fn day_number(value: &str) -> Option<i64> {
    let d = NaiveDate::parse_from_str(value.trim().get(..8)?, "%Y%m%d").ok()?;
    Some(d.signed_duration_since(NaiveDate::default()).num_days())
}

/// Fails date_shifted results whose shift differs from the most common
/// shift seen for the same patient.
pub fn enforce_date_consistency(results: &mut [CheckResult<'_>]) {
    let offset = |r: &CheckResult<'_>| {
        Some(day_number(&r.file_value)? - day_number(&r.entry.answer_value)?)
    };
    let mut counts: HashMap<&str, BTreeMap<i64, usize>> = HashMap::new();
    for r in results.iter() {
        if r.entry.action == ActionType::DateShifted && r.check_passed {
            if let Some(o) = offset(r) {
                *counts.entry(&r.entry.patient).or_default().entry(o).or_default() += 1;
            }
        }
    }
    let modal: HashMap<&str, i64> = counts
        .into_iter()
        .filter_map(|(p, m)| {
            let best = m.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))?;
            Some((p, *best.0))
        })
        .collect();
    for r in results.iter_mut() {
        if r.entry.action == ActionType::DateShifted && r.check_passed {
            let ok = offset(r).is_some_and(|o| modal.get(r.entry.patient.as_str()) == Some(&o));
            if !ok {
                r.check_passed = false;
                r.check_score = 0.0;
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    pub mode: AggregationMode,
    /// Also require one shift per patient for date_shifted.
    pub strict_dates: bool,
    /// Worker threads; 0 means rayon's default.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct ScoreOutcome<'k> {
    pub summary: ScoreSummary,
    /// Failed results in key order (series groups in series mode).
    pub failed: Vec<CheckResult<'k>>,
    /// Instances with no readable submitted file.
    pub missing: Vec<String>,
    /// Number of scored units: entries or series groups.
    pub checked: usize,
}

struct SubmissionIndex {
    by_uid: HashMap<String, PathBuf>,
    by_stem: HashMap<String, PathBuf>,
}

impl SubmissionIndex {
    fn build(dir: &Path) -> Result<Self, ScoreError> {
        let files = list_dicom_files(dir).map_err(|e| ScoreError::Listing {
            path: dir.to_path_buf(),
            msg: e.to_string(),
        })?;
        let uids: Vec<Option<String>> = files
            .par_iter()
            .map(|p| {
                read_file(p, true)
                    .ok()
                    .and_then(|f| f.sop_instance_uid().map(str::to_string))
            })
            .collect();
        let mut by_uid = HashMap::new();
        let mut by_stem = HashMap::new();
        for (p, uid) in files.iter().zip(uids) {
            if let Some(u) = uid {
                by_uid.entry(u).or_insert_with(|| p.clone());
            }
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                by_stem.entry(stem.to_string()).or_insert_with(|| p.clone());
            }
        }
        Ok(SubmissionIndex { by_uid, by_stem })
    }

    fn find(&self, candidates: &[&str]) -> Option<&PathBuf> {
        candidates
            .iter()
            .find_map(|c| self.by_uid.get(*c))
            .or_else(|| candidates.iter().find_map(|c| self.by_stem.get(*c)))
    }
}

struct Originals<'a> {
    dir: &'a Path,
    index: OnceLock<Result<HashMap<String, PathBuf>, String>>,
}

impl Originals<'_> {
    fn load(&self, instance: &str, file_name: &str) -> Result<DicomFile, ScoreError> {
        let direct = self.dir.join(file_name);
        if direct.is_file() {
            let f = read_file(&direct, true).map_err(|source| ScoreError::Original {
                path: direct.clone(),
                source,
            })?;
            if f.sop_instance_uid() == Some(instance) {
                return Ok(f);
            }
        }
        let index = self.index.get_or_init(|| {
            let files = list_dicom_files(self.dir).map_err(|e| e.to_string())?;
            Ok(files
                .par_iter()
                .filter_map(|p| {
                    let f = read_file(p, true).ok()?;
                    Some((f.sop_instance_uid()?.to_string(), p.clone()))
                })
                .collect())
        });
        let index = index.as_ref().map_err(|msg| ScoreError::Listing {
            path: self.dir.to_path_buf(),
            msg: msg.clone(),
        })?;
        let path = index
            .get(instance)
            .ok_or_else(|| ScoreError::KeyCorpusMismatch {
                instance: instance.to_string(),
                file_name: file_name.to_string(),
            })?;
        read_file(path, true).map_err(|source| ScoreError::Original {
            path: path.clone(),
            source,
        })
    }
}

type InstanceChecks<'k> = (Vec<(usize, CheckResult<'k>)>, Option<String>);

/// Scores every key entry against the submission, then aggregates by
/// `options.mode`.
pub fn score_submission<'k>(
    key: &'k AnswerKey,
    orig_dir: &Path,
    sub_dir: &Path,
    patid_map: &MappingTable,
    uid_map: &MappingTable,
    options: &ScoreOptions,
) -> Result<ScoreOutcome<'k>, ScoreError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| ScoreError::ThreadPool(e.to_string()))?;
    pool.install(|| score_in_pool(key, orig_dir, sub_dir, patid_map, uid_map, options))
}

fn score_in_pool<'k>(
    key: &'k AnswerKey,
    orig_dir: &Path,
    sub_dir: &Path,
    patid_map: &MappingTable,
    uid_map: &MappingTable,
    options: &ScoreOptions,
) -> Result<ScoreOutcome<'k>, ScoreError> {
    let index = SubmissionIndex::build(sub_dir)?;
    let originals = Originals {
        dir: orig_dir,
        index: OnceLock::new(),
    };
    let per_instance: Vec<InstanceChecks<'k>> = key
        .instances()
        .par_iter()
        .map(|&inst| {
            let positions = key.instance_positions(inst);
            let first = &key.entries()[positions[0]];
            let original = originals.load(inst, &first.file_name)?;
            let mut candidates = Vec::with_capacity(2);
            if let Some(m) = uid_map.get(inst) {
                candidates.push(m);
            }
            candidates.push(inst);
            let submitted = index.find(&candidates).and_then(|p| read_file(p, true).ok());
            let missing = submitted.is_none().then(|| inst.to_string());
            let results = positions
                .iter()
                .map(|&i| {
                    let e = &key.entries()[i];
                    (i, check_entry(e, &original, submitted.as_ref(), patid_map, uid_map))
                })
                .collect();
            Ok((results, missing))
        })
        .collect::<Result<_, ScoreError>>()?;

    let mut missing = Vec::new();
    let mut ordered: Vec<(usize, CheckResult<'k>)> = Vec::with_capacity(key.len());
    for (results, miss) in per_instance {
        ordered.extend(results);
        missing.extend(miss);
    }
    ordered.sort_by_key(|(i, _)| *i);
    let mut results: Vec<CheckResult<'k>> = ordered.into_iter().map(|(_, r)| r).collect();
    if options.strict_dates {
        enforce_date_consistency(&mut results);
    }
    let scored = match options.mode {
        AggregationMode::Instance => results,
        AggregationMode::Series => group_by_series(&results),
    };
    let summary = ScoreSummary::from_results(options.mode, &scored);
    let checked = scored.len();
    let failed = scored.into_iter().filter(|r| !r.check_passed).collect();
    Ok(ScoreOutcome {
        summary,
        failed,
        missing,
        checked,
    })
}

/// Reads a weights file of `action,weight` rows.
pub fn parse_weights(text: &str) -> Result<BTreeMap<ActionType, f64>, ScoreError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut weights = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ScoreError::BadWeights(e.to_string()))?;
        let (Some(a), Some(w)) = (rec.get(0), rec.get(1)) else {
            return Err(ScoreError::BadWeights(format!("bad row {rec:?}")));
        };
        if a == "action" || a.starts_with('#') {
            continue;
        }
        let a: ActionType = a.parse().map_err(ScoreError::BadWeights)?;
        let w: f64 = w
            .parse()
            .map_err(|_| ScoreError::BadWeights(format!("bad weight {w:?}")))?;
        if weights.insert(a, w).is_some() {
            return Err(ScoreError::BadWeights(format!("{a} listed twice")));
        }
    }
    Ok(weights)
}
