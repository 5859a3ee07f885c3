//! Answer keys and identifier mapping files.
//!
//! An answer key is a CSV table, one row per required action on one
//! attribute of one instance. Columns, in order:
//!
//! `index, tag_ds, tag_name, answer_value, action, action_text, category,
//! subcategory, modality, class, patient, study, series, instance,
//! file_name, region`
//!
//! `action_text` holds `;`-joined tokens. `region` holds `;`-joined
//! `x0:y0:x1:y1` boxes and is set only for `pixels_hidden`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dicom::ElementPath;

#[derive(Debug, Error)]
pub enum AnswerKeyError {
    #[error("{path}: missing column {column:?}")]
    SchemaError { path: String, column: String },
    #[error("row {row}: {msg}")]
    BadAction { row: usize, msg: String },
    #[error("row {row}: unknown subcategory {value:?} for category {category:?}")]
    BadSubcategory {
        row: usize,
        value: String,
        category: String,
    },
    #[error("row {row}: {msg}")]
    BadEntry { row: usize, msg: String },
    #[error("hierarchy conflict: {0}")]
    HierarchyConflict(String),
    #[error("duplicate original {0:?} in mapping file")]
    DuplicateOriginal(String),
    #[error("replacement {replacement:?} used for both {first:?} and {second:?}")]
    NonInjective {
        replacement: String,
        first: String,
        second: String,
    },
    #[error("{0:?} appears both as an original and as a replacement")]
    OverlappingIdentifiers(String),
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The ten scored actions, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionType {
    DateShifted,
    PatidConsistent,
    PixelsHidden,
    PixelsRetained,
    TagRetained,
    TextNotnull,
    TextRemoved,
    TextRetained,
    UidChanged,
    UidConsistent,
}

impl ActionType {
    pub const ALL: [ActionType; 10] = [
        ActionType::DateShifted,
        ActionType::PatidConsistent,
        ActionType::PixelsHidden,
        ActionType::PixelsRetained,
        ActionType::TagRetained,
        ActionType::TextNotnull,
        ActionType::TextRemoved,
        ActionType::TextRetained,
        ActionType::UidChanged,
        ActionType::UidConsistent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionType::DateShifted => "date_shifted",
            ActionType::PatidConsistent => "patid_consistent",
            ActionType::PixelsHidden => "pixels_hidden",
            ActionType::PixelsRetained => "pixels_retained",
            ActionType::TagRetained => "tag_retained",
            ActionType::TextNotnull => "text_notnull",
            ActionType::TextRemoved => "text_removed",
            ActionType::TextRetained => "text_retained",
            ActionType::UidChanged => "uid_changed",
            ActionType::UidConsistent => "uid_consistent",
        }
    }

    /// Actions scored as a fraction of tokens or boxes; the rest are 0/1.
    pub fn is_fractional(self) -> bool {
        matches!(
            self,
            ActionType::PixelsHidden | ActionType::TextRemoved | ActionType::TextRetained
        )
    }

    fn needs_tokens(self) -> bool {
        self.is_fractional()
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActionType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('<').trim_end_matches('>').trim();
        ActionType::ALL
            .into_iter()
            .find(|a| a.as_str() == t)
            .ok_or_else(|| format!("unknown action {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Dicom,
    Hipaa,
    Tcia,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Dicom => "dicom",
            Category::Hipaa => "hipaa",
            Category::Tcia => "tcia",
        }
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "dicom" => Ok(Category::Dicom),
            "hipaa" => Ok(Category::Hipaa),
            "tcia" => Ok(Category::Tcia),
            other => Err(format!("unknown category {other:?}")),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The closed subcategory taxonomy, in Categories-sheet order.
pub const SUBCATEGORIES: [(Category, &str); 25] = [
    (Category::Dicom, "DICOM-IOD-1"),
    (Category::Dicom, "DICOM-IOD-2"),
    (Category::Dicom, "DICOM-P15-BASIC-C"),
    (Category::Dicom, "DICOM-P15-BASIC-U"),
    (Category::Hipaa, "HIPAA-A"),
    (Category::Hipaa, "HIPAA-B"),
    (Category::Hipaa, "HIPAA-C"),
    (Category::Hipaa, "HIPAA-D"),
    (Category::Hipaa, "HIPAA-G"),
    (Category::Hipaa, "HIPAA-H"),
    (Category::Hipaa, "HIPAA-R"),
    (Category::Tcia, "TCIA-P15-BASIC-D"),
    (Category::Tcia, "TCIA-P15-BASIC-X"),
    (Category::Tcia, "TCIA-P15-BASIC-X/Z/D"),
    (Category::Tcia, "TCIA-P15-BASIC-Z"),
    (Category::Tcia, "TCIA-P15-BASIC-Z/D"),
    (Category::Tcia, "TCIA-P15-DESC-C"),
    (Category::Tcia, "TCIA-P15-DEV-C"),
    (Category::Tcia, "TCIA-P15-DEV-K"),
    (Category::Tcia, "TCIA-P15-MOD-C"),
    (Category::Tcia, "TCIA-P15-PAT-K"),
    (Category::Tcia, "TCIA-P15-PIX-K"),
    (Category::Tcia, "TCIA-PTKB-K"),
    (Category::Tcia, "TCIA-PTKB-X"),
    (Category::Tcia, "TCIA-REV"),
];

pub fn subcategory_index(category: Category, subcategory: &str) -> Option<usize> {
    SUBCATEGORIES
        .iter()
        .position(|&(c, s)| c == category && s == subcategory)
}

/// One box of burned-in text, `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl fmt::Display for PixelBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.x0, self.y0, self.x1, self.y1)
    }
}

impl FromStr for PixelBox {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("bad box {s:?}"))?;
        let [x0, y0, x1, y1] = n[..] else {
            return Err(format!("bad box {s:?}"));
        };
        if x0 >= x1 || y0 >= y1 {
            return Err(format!("empty box {s:?}"));
        }
        Ok(PixelBox { x0, y0, x1, y1 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerKeyEntry {
    pub index: usize,
    pub tag_ds: ElementPath,
    pub tag_name: String,
    pub answer_value: String,
    pub action: ActionType,
    pub action_text: Vec<String>,
    pub category: Category,
    pub subcategory: String,
    pub modality: String,
    pub class: String,
    pub patient: String,
    pub study: String,
    pub series: String,
    pub instance: String,
    pub file_name: String,
    pub region: Vec<PixelBox>,
}

pub const KEY_COLUMNS: [&str; 16] = [
    "index",
    "tag_ds",
    "tag_name",
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
    "region",
];

#[derive(Debug, Serialize, Deserialize)]
struct KeyRow {
    index: String,
    tag_ds: String,
    tag_name: String,
    answer_value: String,
    action: String,
    action_text: String,
    category: String,
    subcategory: String,
    modality: String,
    class: String,
    patient: String,
    study: String,
    series: String,
    instance: String,
    file_name: String,
    region: String,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

impl AnswerKeyEntry {
    fn from_row(row: KeyRow, line: usize) -> Result<Self, AnswerKeyError> {
        let bad_entry = |msg: String| AnswerKeyError::BadEntry { row: line, msg };
        let bad_action = |msg: String| AnswerKeyError::BadAction { row: line, msg };
        let action: ActionType = row.action.parse().map_err(bad_action)?;
        let category: Category = row.category.parse().map_err(bad_entry)?;
        if subcategory_index(category, row.subcategory.trim()).is_none() {
            return Err(AnswerKeyError::BadSubcategory {
                row: line,
                value: row.subcategory,
                category: row.category,
            });
        }
        let action_text = split_list(&row.action_text);
        if action.needs_tokens() && action_text.is_empty() {
            return Err(bad_action(format!("{action} needs action_text tokens")));
        }
        let region = split_list(&row.region)
            .iter()
            .map(|b| b.parse::<PixelBox>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(bad_entry)?;
        match (action == ActionType::PixelsHidden, region.is_empty()) {
            (true, true) => return Err(bad_action("pixels_hidden needs a region".into())),
            (false, false) => return Err(bad_action(format!("{action} must not carry a region"))),
            _ => {}
        }
        Ok(AnswerKeyEntry {
            index: row
                .index
                .trim()
                .parse()
                .map_err(|_| bad_entry(format!("bad index {:?}", row.index)))?,
            tag_ds: row
                .tag_ds
                .parse()
                .map_err(|e| bad_entry(format!("{e}")))?,
            tag_name: row.tag_name,
            answer_value: row.answer_value,
            action,
            action_text,
            category,
            subcategory: row.subcategory.trim().to_string(),
            modality: row.modality,
            class: row.class,
            patient: row.patient,
            study: row.study,
            series: row.series,
            instance: row.instance,
            file_name: row.file_name,
            region,
        })
    }

    fn to_row(&self) -> KeyRow {
        KeyRow {
            index: self.index.to_string(),
            tag_ds: self.tag_ds.to_string(),
            tag_name: self.tag_name.clone(),
            answer_value: self.answer_value.clone(),
            action: self.action.to_string(),
            action_text: self.action_text.join(";"),
            category: self.category.to_string(),
            subcategory: self.subcategory.clone(),
            modality: self.modality.clone(),
            class: self.class.clone(),
            patient: self.patient.clone(),
            study: self.study.clone(),
            series: self.series.clone(),
            instance: self.instance.clone(),
            file_name: self.file_name.clone(),
            region: self
                .region
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerKey {
    entries: Vec<AnswerKeyEntry>,
    by_instance: HashMap<String, Vec<usize>>,
    by_series: HashMap<String, Vec<usize>>,
}

impl AnswerKey {
    /// Builds the indexes and checks that every instance sits under one
    /// series, every series under one study and every study under one patient.
    pub fn new(entries: Vec<AnswerKeyEntry>) -> Result<Self, AnswerKeyError> {
        let mut by_instance: HashMap<String, Vec<usize>> = HashMap::new();
        let mut by_series: HashMap<String, Vec<usize>> = HashMap::new();
        let mut parent_of: HashMap<(u8, &str), &str> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            for (level, child, parent) in [
                (0u8, e.instance.as_str(), e.series.as_str()),
                (1, e.series.as_str(), e.study.as_str()),
                (2, e.study.as_str(), e.patient.as_str()),
            ] {
                let prev = *parent_of.entry((level, child)).or_insert(parent);
                if prev != parent {
                    return Err(AnswerKeyError::HierarchyConflict(format!(
                        "{child} is under both {prev} and {parent}"
                    )));
                }
            }
            by_instance.entry(e.instance.clone()).or_default().push(i);
            by_series.entry(e.series.clone()).or_default().push(i);
        }
        Ok(AnswerKey {
            entries,
            by_instance,
            by_series,
        })
    }

    pub fn entries(&self) -> &[AnswerKeyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries for one instance, in key order.
    pub fn entries_for_instance(&self, instance_uid: &str) -> Vec<&AnswerKeyEntry> {
        self.by_instance
            .get(instance_uid)
            .map(|ix| ix.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub(crate) fn instance_positions(&self, instance_uid: &str) -> &[usize] {
        self.by_instance.get(instance_uid).map_or(&[], Vec::as_slice)
    }

    pub fn entries_for_series(&self, series_uid: &str) -> Vec<&AnswerKeyEntry> {
        self.by_series
            .get(series_uid)
            .map(|ix| ix.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    /// Instance UIDs in order of first appearance.
    pub fn instances(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .map(|e| e.instance.as_str())
            .filter(|i| seen.insert(*i))
            .collect()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        if self.entries.is_empty() {
            w.write_record(KEY_COLUMNS).expect("in-memory write");
        }
        for e in &self.entries {
            w.serialize(e.to_row()).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn from_reader(rdr: impl std::io::Read, name: &str) -> Result<Self, AnswerKeyError> {
        let csv_err = |source| AnswerKeyError::Csv {
            path: name.to_string(),
            source,
        };
        let mut rdr = csv::Reader::from_reader(rdr);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        for col in KEY_COLUMNS {
            if !headers.iter().any(|h| h.trim() == col) {
                return Err(AnswerKeyError::SchemaError {
                    path: name.to_string(),
                    column: col.to_string(),
                });
            }
        }
        let mut entries = Vec::new();
        for (i, row) in rdr.deserialize::<KeyRow>().enumerate() {
            entries.push(AnswerKeyEntry::from_row(row.map_err(csv_err)?, i + 2)?);
        }
        AnswerKey::new(entries)
    }
}

pub fn load_answer_key(path: &Path) -> Result<AnswerKey, AnswerKeyError> {
    let f = std::fs::File::open(path).map_err(|source| AnswerKeyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    AnswerKey::from_reader(f, &path.display().to_string())
}

pub fn write_answer_key(path: &Path, key: &AnswerKey) -> Result<(), AnswerKeyError> {
    std::fs::write(path, key.to_csv()).map_err(|source| AnswerKeyError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    PatientId,
    Uid,
}

/// An injective original → replacement table read from a mapping file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTable {
    pub forward: BTreeMap<String, String>,
    pub kind: MappingKind,
}

impl MappingTable {
    pub fn get(&self, original: &str) -> Option<&str> {
        self.forward.get(original).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn from_pairs(
        kind: MappingKind,
        pairs: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, AnswerKeyError> {
        let mut forward = BTreeMap::new();
        let mut reverse: HashMap<String, String> = HashMap::new();
        for (o, r) in pairs {
            if forward.contains_key(&o) {
                return Err(AnswerKeyError::DuplicateOriginal(o));
            }
            if let Some(first) = reverse.get(&r) {
                return Err(AnswerKeyError::NonInjective {
                    replacement: r,
                    first: first.clone(),
                    second: o,
                });
            }
            reverse.insert(r.clone(), o.clone());
            forward.insert(o, r);
        }
        if let Some(both) = forward.keys().find(|o| reverse.contains_key(*o)) {
            return Err(AnswerKeyError::OverlappingIdentifiers(both.clone()));
        }
        Ok(MappingTable { forward, kind })
    }

    pub fn from_reader(
        rdr: impl std::io::Read,
        kind: MappingKind,
        name: &str,
    ) -> Result<Self, AnswerKeyError> {
        let csv_err = |source| AnswerKeyError::Csv {
            path: name.to_string(),
            source,
        };
        let mut rdr = csv::Reader::from_reader(rdr);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        for col in ["original", "replacement"] {
            if !headers.iter().any(|h| h.trim() == col) {
                return Err(AnswerKeyError::SchemaError {
                    path: name.to_string(),
                    column: col.to_string(),
                });
            }
        }
        #[derive(Deserialize)]
        struct Row {
            original: String,
            replacement: String,
        }
        let pairs = rdr
            .deserialize::<Row>()
            .map(|r| r.map(|r| (r.original, r.replacement)).map_err(csv_err))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_pairs(kind, pairs)
    }
}

pub fn load_mapping(path: &Path, kind: MappingKind) -> Result<MappingTable, AnswerKeyError> {
    let f = std::fs::File::open(path).map_err(|source| AnswerKeyError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    MappingTable::from_reader(f, kind, &path.display().to_string())
}
