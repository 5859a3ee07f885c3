//! De-identification engine.

mod dates;
mod engine;
mod policy;
mod redact;
mod scrub;
mod vault;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use dates::{is_date_like, shift_date, MAX_OFFSET_DAYS};
pub use engine::{deidentify, AppliedAction};
pub use policy::{DeidPolicy, PolicyAction, PrivateKey, DEFAULT_POLICY};
pub use redact::{load_regions, redact_pixels, regions_csv, RedactionRegion};
pub use scrub::{harvest_identifiers, scrub_text, ScrubberConfig, TokenMatcher};
pub use vault::{mapping_csv, write_mapping, IdentityVault, DEFAULT_UID_ROOT};

use crate::dicom::{self, tags, DicomError, DicomFile};

#[derive(Debug, Error)]
pub enum DeidError {
    #[error("policy assigns {action} to {path} with VR {vr}")]
    PolicyConflict {
        path: String,
        action: String,
        vr: &'static str,
    },
    #[error("replacement {replacement} already maps {first}; refusing to map {second}")]
    VaultCollision {
        replacement: String,
        first: String,
        second: String,
    },
    #[error("invalid UID {0:?}")]
    InvalidUid(String),
    #[error("unparseable date {0:?}")]
    UnparseableDate(String),
    #[error("date offset {0} outside +/-36500 days")]
    OffsetOutOfRange(i64),
    #[error("region {region} outside {columns}x{rows} image")]
    RegionOutOfBounds {
        region: String,
        rows: usize,
        columns: usize,
    },
    #[error("pixel data has {found} bytes, geometry needs {expected}")]
    PixelDataTooShort { expected: usize, found: usize },
    #[error("pixel data present without usable Rows/Columns/Bits Allocated")]
    MissingPixelGeometry,
    #[error("policy line {line}: {msg}")]
    PolicyParse { line: usize, msg: String },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: DicomError,
    },
    #[error(transparent)]
    Dicom(#[from] DicomError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl DeidError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DeidError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        DeidError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Every `*.dcm` file under `dir`, sorted by path.
pub fn list_dicom_files(dir: &Path) -> Result<Vec<PathBuf>, DeidError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            DeidError::Io {
                path,
                source: e.into(),
            }
        })?;
        let is_dcm = entry
            .path()
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("dcm"));
        if entry.file_type().is_file() && is_dcm {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

fn path_component(s: Option<&str>) -> String {
    match s {
        Some(v) if !v.is_empty() => v
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
            .collect(),
        _ => "unknown".to_string(),
    }
}

/// Output location `<patient>/<study>/<series>/<instance>.dcm`, from the
/// de-identified values.
pub fn layout_path(file: &DicomFile) -> PathBuf {
    let ds = &file.dataset;
    let mut p = PathBuf::new();
    p.push(path_component(ds.text(tags::PATIENT_ID)));
    p.push(path_component(ds.text(tags::STUDY_INSTANCE_UID)));
    p.push(path_component(ds.text(tags::SERIES_INSTANCE_UID)));
    p.push(format!("{}.dcm", path_component(ds.text(tags::SOP_INSTANCE_UID))));
    p
}

/// Settings shared by every file of one corpus run.
pub struct DeidRun<'a> {
    pub policy: &'a DeidPolicy,
    pub scrub: &'a ScrubberConfig,
    pub regions: &'a [RedactionRegion],
    pub lenient: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusOutcome {
    pub files: usize,
    pub actions: usize,
    pub emptied_dates: usize,
}

/// De-identifies every file under `input` into `output` using `threads`
/// workers, then writes `patid.csv` and `uid.csv` to `output`.
pub fn deidentify_corpus(
    input: &Path,
    output: &Path,
    run: &DeidRun<'_>,
    vault: &IdentityVault,
    threads: usize,
) -> Result<CorpusOutcome, DeidError> {
    let files = list_dicom_files(input)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| DeidError::ThreadPool(e.to_string()))?;
    let per_file = pool.install(|| {
        files
            .par_iter()
            .map(|path| -> Result<(usize, usize), DeidError> {
                let file = dicom::read_file(path, run.lenient).map_err(|source| DeidError::File {
                    path: path.clone(),
                    source,
                })?;
                let (out, log) = deidentify(&file, run.policy, vault, run.scrub, run.regions)?;
                dicom::write_file(output.join(layout_path(&out)), &out)?;
                let emptied = log
                    .iter()
                    .filter(|a| a.action == "empty_unparseable_date")
                    .count();
                Ok((log.len(), emptied))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    vault.export_mappings(output)?;
    Ok(CorpusOutcome {
        files: files.len(),
        actions: per_file.iter().map(|p| p.0).sum(),
        emptied_dates: per_file.iter().map(|p| p.1).sum(),
    })
}
