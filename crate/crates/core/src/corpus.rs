//! Deterministic synthetic corpus generation.
//!
//! [`generate`] writes a directory of Part-10 files laid out as
//! `<patient>/<study>/<series>/<instance>.dcm` together with:
//!
//! * `key.csv`, the answer key,
//! * `truth_patid.csv` and `truth_uid.csv`, the mappings a run of the
//!   bundled engine with the same seed will produce,
//! * `regions.csv`, the burned-in text boxes.
//!
//! All identities and word pools are invented. Filler words contain no
//! digits and never coincide with a name component, so a scrubber that only
//! removes identifiers keeps every filler token.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::answer_key::{
    write_answer_key, ActionType, AnswerKey, AnswerKeyEntry, AnswerKeyError, Category, PixelBox,
};
use crate::deid::{regions_csv, write_mapping, IdentityVault, RedactionRegion};
use crate::dicom::{
    dictionary, read_file, tags, write_file, DataElement, Dataset, DicomError, DicomFile,
    ElementPath, Tag, TransferSyntax, Vr,
};

pub const KEY_FILE: &str = "key.csv";
pub const TRUTH_PATID_FILE: &str = "truth_patid.csv";
pub const TRUTH_UID_FILE: &str = "truth_uid.csv";
pub const REGIONS_FILE: &str = "regions.csv";

/// Creator string of the synthetic private block in group 0009.
pub const PRIVATE_CREATOR: &str = "SYNTH_VENDOR";
pub const PRIVATE_CREATOR_TAG: Tag = Tag::new(0x0009, 0x0010);
/// Private attribute that carries no PHI and should be kept.
pub const PRIVATE_SAFE_TAG: Tag = Tag::new(0x0009, 0x1010);
/// Private attribute that carries PHI and should be removed.
pub const PRIVATE_PHI_TAG: Tag = Tag::new(0x0009, 0x1020);

const SPECIFIC_CHARACTER_SET: Tag = Tag::new(0x0008, 0x0005);

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    SpecError(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Dicom(#[from] DicomError),
    #[error(transparent)]
    Key(#[from] AnswerKeyError),
    #[error(transparent)]
    Deid(#[from] crate::deid::DeidError),
    #[error("{} key entries disagree with the corpus; first: {}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    ValidationFailure(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Cr,
    Mr,
    Ct,
    Pet,
    Dx,
    Sr,
    Mg,
    Us,
}

impl Modality {
    pub const ALL: [Modality; 8] = [
        Modality::Cr,
        Modality::Mr,
        Modality::Ct,
        Modality::Pet,
        Modality::Dx,
        Modality::Sr,
        Modality::Mg,
        Modality::Us,
    ];

    /// Label used in answer keys.
    pub fn label(self) -> &'static str {
        match self {
            Modality::Cr => "CR",
            Modality::Mr => "MR",
            Modality::Ct => "CT",
            Modality::Pet => "PET",
            Modality::Dx => "DX",
            Modality::Sr => "SR",
            Modality::Mg => "MG",
            Modality::Us => "US",
        }
    }

    /// Value of the Modality attribute.
    pub fn code(self) -> &'static str {
        match self {
            Modality::Pet => "PT",
            m => m.label(),
        }
    }

    pub fn sop_class(self) -> &'static str {
        match self {
            Modality::Cr => "1.2.840.10008.5.1.4.1.1.1",
            Modality::Dx => "1.2.840.10008.5.1.4.1.1.1.1",
            Modality::Mg => "1.2.840.10008.5.1.4.1.1.1.2",
            Modality::Ct => "1.2.840.10008.5.1.4.1.1.2",
            Modality::Mr => "1.2.840.10008.5.1.4.1.1.4",
            Modality::Us => "1.2.840.10008.5.1.4.1.1.6.1",
            Modality::Sr => "1.2.840.10008.5.1.4.1.1.88.11",
            Modality::Pet => "1.2.840.10008.5.1.4.1.1.128",
        }
    }

    pub fn has_pixels(self) -> bool {
        self != Modality::Sr
    }

    /// Modalities whose instances may carry burned-in text.
    pub fn may_burn_in(self) -> bool {
        matches!(self, Modality::Us | Modality::Cr)
    }

    fn body_parts(self) -> &'static [&'static str] {
        match self {
            Modality::Cr => &["CHEST", "HAND", "PELVIS"],
            Modality::Mr => &["BRAIN", "KNEE", "LSPINE"],
            Modality::Ct => &["CHEST", "HEAD", "ABDOMEN"],
            Modality::Pet => &["WHOLEBODY"],
            Modality::Dx => &["CHEST", "FOOT"],
            Modality::Sr => &["CHEST", "BREAST"],
            Modality::Mg => &["BREAST"],
            Modality::Us => &["ABDOMEN", "THYROID", "PELVIS"],
        }
    }

    fn bits(self) -> usize {
        if self == Modality::Us {
            8
        } else {
            16
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        Modality::ALL
            .into_iter()
            .find(|m| m.label() == up || m.code() == up)
            .ok_or_else(|| format!("unknown modality {s:?}"))
    }
}

/// Patient counts per modality in the reference test set, used as default
/// shares.
pub const REFERENCE_PATIENT_COUNTS: [(Modality, u32); 8] = [
    (Modality::Cr, 33),
    (Modality::Mr, 79),
    (Modality::Ct, 60),
    (Modality::Pet, 44),
    (Modality::Dx, 32),
    (Modality::Sr, 31),
    (Modality::Mg, 37),
    (Modality::Us, 36),
];

pub fn reference_mix() -> BTreeMap<Modality, f64> {
    let total: u32 = REFERENCE_PATIENT_COUNTS.iter().map(|(_, n)| n).sum();
    REFERENCE_PATIENT_COUNTS
        .iter()
        .map(|&(m, n)| (m, f64::from(n) / f64::from(total)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub n_patients: usize,
    /// Share of patients per modality; must sum to 1.
    pub modality_mix: BTreeMap<Modality, f64>,
    pub instances_per_series: RangeInclusive<usize>,
    pub studies_per_patient: RangeInclusive<usize>,
    pub series_per_study: RangeInclusive<usize>,
    /// Fraction of US and CR instances with burned-in text.
    pub burnin_fraction: f64,
    /// Fraction of series written in implicit VR.
    pub implicit_fraction: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_patients: 20,
            modality_mix: reference_mix(),
            instances_per_series: 4..=9,
            studies_per_patient: 1..=2,
            series_per_study: 1..=2,
            burnin_fraction: 0.5,
            implicit_fraction: 0.25,
            seed: 0,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let err = |m: String| Err(CorpusError::SpecError(m));
        if self.n_patients == 0 {
            return err("n_patients must be at least 1".into());
        }
        let sum: f64 = self.modality_mix.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return err(format!("modality shares sum to {sum}"));
        }
        if self.modality_mix.values().any(|&s| !(0.0..=1.0).contains(&s)) {
            return err("modality shares must lie in [0, 1]".into());
        }
        for (name, r) in [
            ("instances_per_series", &self.instances_per_series),
            ("studies_per_patient", &self.studies_per_patient),
            ("series_per_study", &self.series_per_study),
        ] {
            if r.is_empty() || *r.start() == 0 {
                return err(format!("{name} must be a non-empty range starting at 1 or more"));
            }
        }
        for (name, f) in [
            ("burnin_fraction", self.burnin_fraction),
            ("implicit_fraction", self.implicit_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return err(format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Patients per modality by largest remainder, in modality order.
    pub fn modality_counts(&self) -> Vec<(Modality, usize)> {
        let n = self.n_patients as f64;
        let mut rows: Vec<(Modality, usize, f64)> = self
            .modality_mix
            .iter()
            .map(|(&m, &s)| {
                let exact = s * n;
                (m, exact.floor() as usize, exact - exact.floor())
            })
            .collect();
        let assigned: usize = rows.iter().map(|r| r.1).sum();
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[b].2.total_cmp(&rows[a].2).then(a.cmp(&b)));
        for &i in order.iter().take(self.n_patients.saturating_sub(assigned)) {
            rows[i].1 += 1;
        }
        rows.into_iter().map(|(m, c, _)| (m, c)).collect()
    }
}

const FAMILY_NAMES: &[&str] = &[
    "ABBOTT", "BRANDT", "CALLOWAY", "DRUMMOND", "ELLSWORTH", "FAIRCHILD", "GALLOWAY", "HOLLOWAY",
    "IVERSEN", "JARDINE", "KESWICK", "LANGFORD", "MERRIWEATHER", "NORCROSS", "OAKHURST",
    "PEMBERTON", "QUINCEY", "ROCKWELL", "STANHOPE", "THORNBURY", "UPSHAW", "VANDERMEER",
    "WHITLOCK", "YARBOROUGH",
];
const GIVEN_NAMES: &[&str] = &[
    "ADELAIDE", "BERNARD", "CORDELIA", "DESMOND", "EVANGELINE", "FLETCHER", "GWENDOLYN",
    "HORATIO", "IMOGEN", "JASPER", "LAVINIA", "MORDECAI", "OTTILIE", "PERCIVAL", "ROSALIND",
    "SEBASTIAN", "THEODORA", "WINIFRED",
];
const STREETS: &[&str] = &["MAPLE", "JUNIPER", "HAWTHORN", "LINDEN", "SYCAMORE", "WILLOW"];
const STREET_KINDS: &[&str] = &["STREET", "AVENUE", "LANE", "COURT"];
const CITIES: &[&str] = &["EASTBROOK", "MILLHAVEN", "PORTWELL", "STONEBRIDGE", "WESTFIELD"];
const INSTITUTIONS: &[&str] = &[
    "MERCY GENERAL HOSPITAL",
    "LAKESIDE MEDICAL CENTER",
    "NORTHGATE IMAGING CLINIC",
    "RIVERBEND HEALTH",
];
const MANUFACTURERS: &[&str] = &["SYNTHETIC MEDICAL SYSTEMS", "ACME IMAGING"];

const PROCEDURES: &[&str] = &[
    "BREAST^ROUTINE",
    "CHEST^PA",
    "HEAD^ROUTINE",
    "ABDOMEN^SURVEY",
    "KNEE^LEFT",
    "SPINE^LUMBAR",
    "PELVIS^SURVEY",
];
const FINDINGS: &[&str] = &["MASS", "NODULE", "PAIN", "FRACTURE", "SWELLING", "LESION", "CYST"];
const PLANES: &[&str] = &["AXIAL", "CORONAL", "SAGITTAL", "OBLIQUE"];
const SEQUENCES: &[&str] = &["CONTRAST", "NONCONTRAST", "LOCALIZER", "SURVEY", "DELAYED"];
const CONNECTIVES: &[&str] = &[
    "for", "acquired", "patient", "reports", "requested", "under", "contact", "with", "seen",
];

/// Every filler word the generator can put into free text.
pub fn filler_vocabulary() -> BTreeSet<&'static str> {
    [PROCEDURES, FINDINGS, PLANES, SEQUENCES, CONNECTIVES]
        .iter()
        .flat_map(|w| w.iter().copied())
        .collect()
}

/// Every name component the generator can emit.
pub fn name_vocabulary() -> BTreeSet<&'static str> {
    FAMILY_NAMES.iter().chain(GIVEN_NAMES).copied().chain(["DOE", "JANE"]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticIdentity {
    pub name: String,
    pub patient_id: String,
    pub birth_date: String,
    pub accession: String,
    pub phone: String,
    pub ssn_like: String,
    pub other_id: String,
    pub address: String,
    pub sex: &'static str,
    pub emergency_phone: String,
    pub record_number: String,
    pub free_text_snippets: Vec<String>,
}

fn digits(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect()
}

fn phone(rng: &mut ChaCha8Rng) -> String {
    format!("555-{}-{}", rng.gen_range(200..1000), digits(rng, 4))
}

fn person_name(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{}^{}",
        FAMILY_NAMES.choose(rng).unwrap(),
        GIVEN_NAMES.choose(rng).unwrap()
    )
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().expect("non-empty pool")
}

fn fresh_uid(rng: &mut ChaCha8Rng) -> String {
    format!("2.25.{}", rng.gen::<u128>())
}

fn da(d: NaiveDate) -> String {
    d.format("%Y%m%d").to_string()
}

impl SyntheticIdentity {
    fn draw(rng: &mut ChaCha8Rng, index: usize) -> Self {
        let (name, ssn_like) = if index == 0 {
            ("DOE^JANE".to_string(), "311-25-3722".to_string())
        } else {
            (
                person_name(rng),
                format!(
                    "{}-{}-{}",
                    rng.gen_range(100..900),
                    rng.gen_range(10..100),
                    digits(rng, 4)
                ),
            )
        };
        let birth = NaiveDate::from_ymd_opt(1930, 1, 1).unwrap()
            + Duration::days(rng.gen_range(0..70 * 365));
        let patient_id = format!("MRN{:06}", 100_000 + index * 7 + rng.gen_range(0..7));
        let mut id = SyntheticIdentity {
            name,
            patient_id,
            birth_date: da(birth),
            accession: format!("ACC{}", digits(rng, 7)),
            phone: phone(rng),
            ssn_like,
            other_id: format!("OP{}", digits(rng, 7)),
            address: format!(
                "{} {} {} {}",
                rng.gen_range(10..999),
                pick(rng, STREETS),
                pick(rng, STREET_KINDS),
                pick(rng, CITIES)
            ),
            sex: if rng.gen_bool(0.5) { "F" } else { "M" },
            emergency_phone: phone(rng),
            record_number: format!("REC{}", digits(rng, 7)),
            free_text_snippets: Vec::new(),
        };
        id.free_text_snippets = vec![
            format!("patient reports {} contact {}", pick(rng, FINDINGS), id.patient_id),
            format!("seen for {} under {}", pick(rng, FINDINGS), id.emergency_phone),
        ];
        id
    }
}

/// Free text assembled from filler words and planted PHI tokens.
struct FreeText {
    value: String,
    phi: Vec<String>,
    filler: Vec<String>,
}

enum Part {
    Fill(String),
    Phi(String),
}

fn compose(parts: Vec<Part>) -> FreeText {
    let mut words = Vec::new();
    let mut phi = Vec::new();
    let mut filler: Vec<String> = Vec::new();
    for p in parts {
        match p {
            Part::Fill(w) => {
                if !filler.contains(&w) {
                    filler.push(w.clone());
                }
                words.push(w);
            }
            Part::Phi(w) => {
                if !phi.contains(&w) {
                    phi.push(w.clone());
                }
                words.push(w);
            }
        }
    }
    FreeText {
        value: words.join(" "),
        phi,
        filler,
    }
}

fn fill(w: &str) -> Part {
    Part::Fill(w.to_string())
}

struct StudyInfo {
    uid: String,
    date: NaiveDate,
    accession: String,
    description: FreeText,
    procedure: FreeText,
    institution: &'static str,
    referring: String,
    study_id: String,
}

struct SeriesInfo {
    uid: String,
    number: i64,
    description: FreeText,
    body_part: &'static str,
    station: String,
    device_serial: String,
    operator: String,
    manufacturer: &'static str,
    frame_of_reference: String,
    rows: usize,
    columns: usize,
    syntax: TransferSyntax,
}

/// Result of [`generate`].
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub root: PathBuf,
    pub key: AnswerKey,
    pub patid_truth: BTreeMap<String, String>,
    pub uid_truth: BTreeMap<String, String>,
    pub regions: Vec<RedactionRegion>,
    pub files: usize,
}

struct KeyBuilder {
    entries: Vec<AnswerKeyEntry>,
}

struct InstanceCtx<'a> {
    modality: Modality,
    patient: &'a str,
    study: &'a str,
    series: &'a str,
    instance: &'a str,
    file_name: &'a str,
}

impl KeyBuilder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        ctx: &InstanceCtx<'_>,
        path: ElementPath,
        answer: String,
        action: ActionType,
        tokens: Vec<String>,
        subcategory: &str,
        region: Vec<PixelBox>,
    ) {
        let category = match subcategory.split('-').next() {
            Some("DICOM") => Category::Dicom,
            Some("HIPAA") => Category::Hipaa,
            _ => Category::Tcia,
        };
        self.entries.push(AnswerKeyEntry {
            index: self.entries.len(),
            tag_name: dictionary::tag_name(path.tag).to_string(),
            tag_ds: path,
            answer_value: answer,
            action,
            action_text: tokens,
            category,
            subcategory: subcategory.to_string(),
            modality: ctx.modality.label().to_string(),
            class: ctx.modality.sop_class().to_string(),
            patient: ctx.patient.to_string(),
            study: ctx.study.to_string(),
            series: ctx.series.to_string(),
            instance: ctx.instance.to_string(),
            file_name: ctx.file_name.to_string(),
            region,
        });
    }

    fn simple(&mut self, ctx: &InstanceCtx<'_>, ds: &Dataset, tag: Tag, action: ActionType, sub: &str) {
        let answer = ds.get(tag).map(|e| e.to_text()).unwrap_or_default();
        self.push(ctx, ElementPath::top(tag), answer, action, Vec::new(), sub, Vec::new());
    }

    fn removed(&mut self, ctx: &InstanceCtx<'_>, path: ElementPath, value: &str, tokens: Vec<String>, sub: &str) {
        self.push(ctx, path, value.to_string(), ActionType::TextRemoved, tokens, sub, Vec::new());
    }

    fn free_text(&mut self, ctx: &InstanceCtx<'_>, path: ElementPath, text: &FreeText, removed_sub: &str) {
        self.removed(ctx, path.clone(), &text.value, text.phi.clone(), removed_sub);
        self.push(
            ctx,
            path,
            text.value.clone(),
            ActionType::TextRetained,
            text.filler.clone(),
            "TCIA-P15-DESC-C",
            Vec::new(),
        );
    }
}

fn all_tokens(v: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in crate::tokens::split(v) {
        if !out.iter().any(|o| o == t) {
            out.push(t.to_string());
        }
    }
    out
}

fn pixel_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn noise(rng: &mut ChaCha8Rng, rows: usize, columns: usize, bits: usize) -> Vec<u8> {
    let n = rows * columns;
    if bits == 8 {
        (0..n).map(|_| rng.gen_range(1..=255u8)).collect()
    } else {
        (0..n)
            .flat_map(|_| rng.gen_range(1..=4095u16).to_le_bytes())
            .collect()
    }
}

/// Paints a two-level block pattern into `b`, so the box is never uniform.
fn burn_glyphs(px: &mut [u8], columns: usize, bits: usize, b: &PixelBox) {
    let (hi, lo): (u16, u16) = if bits == 8 { (255, 90) } else { (4095, 1365) };
    for y in b.y0..b.y1 {
        for x in b.x0..b.x1 {
            let v = if ((x - b.x0) / 2 + (y - b.y0) / 3).is_multiple_of(2) { hi } else { lo };
            let i = y * columns + x;
            if bits == 8 {
                px[i] = v as u8;
            } else {
                px[2 * i..2 * i + 2].copy_from_slice(&v.to_le_bytes());
            }
        }
    }
}

fn glyph_boxes(rng: &mut ChaCha8Rng, rows: usize, columns: usize) -> Vec<PixelBox> {
    let w1 = rng.gen_range(24..=columns / 2);
    let w2 = rng.gen_range(16..=columns / 3);
    vec![
        PixelBox { x0: 4, y0: 4, x1: 4 + w1, y1: 14 },
        PixelBox {
            x0: columns - 4 - w2,
            y0: rows - 12,
            x1: columns - 4,
            y1: rows - 4,
        },
    ]
}

/// Generates a corpus under `out`. Equal specs give byte-identical trees.
pub fn generate(spec: &CorpusSpec, out: &Path) -> Result<GeneratedCorpus, CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut modalities: Vec<Modality> = spec
        .modality_counts()
        .into_iter()
        .flat_map(|(m, c)| std::iter::repeat_n(m, c))
        .collect();
    modalities.shuffle(&mut rng);

    let mut key = KeyBuilder { entries: Vec::new() };
    let mut regions = Vec::new();
    let mut uids: BTreeSet<String> = BTreeSet::new();
    let mut patient_ids = BTreeSet::new();
    let mut files = 0;

    for (p, &modality) in modalities.iter().enumerate() {
        let who = SyntheticIdentity::draw(&mut rng, p);
        patient_ids.insert(who.patient_id.clone());
        let n_studies = rng.gen_range(spec.studies_per_patient.clone());
        for s in 0..n_studies {
            let date = NaiveDate::from_ymd_opt(2005, 1, 1).unwrap()
                + Duration::days(rng.gen_range(0..18 * 365));
            let (proc_, finding) = if p == 0 && s == 0 {
                ("BREAST^ROUTINE", "MASS")
            } else {
                (pick(&mut rng, PROCEDURES), pick(&mut rng, FINDINGS))
            };
            let study = StudyInfo {
                uid: fresh_uid(&mut rng),
                date,
                accession: if s == 0 { who.accession.clone() } else { format!("ACC{}", digits(&mut rng, 7)) },
                description: compose(vec![
                    fill(proc_),
                    fill("for"),
                    fill(finding),
                    fill("for"),
                    Part::Phi(who.ssn_like.clone()),
                ]),
                procedure: compose(vec![
                    fill(pick(&mut rng, PROCEDURES)),
                    fill("requested"),
                    fill("under"),
                    Part::Phi(who.emergency_phone.clone()),
                ]),
                institution: pick(&mut rng, INSTITUTIONS),
                referring: person_name(&mut rng),
                study_id: format!("S{}", digits(&mut rng, 5)),
            };
            let n_series = rng.gen_range(spec.series_per_study.clone());
            for k in 0..n_series {
                let birth = NaiveDate::parse_from_str(&who.birth_date, "%Y%m%d").unwrap();
                let side = [64usize, 96, 128, 160, 192, 256];
                let series = SeriesInfo {
                    uid: fresh_uid(&mut rng),
                    number: k as i64 + 1,
                    description: compose(vec![
                        fill(pick(&mut rng, PLANES)),
                        fill(pick(&mut rng, SEQUENCES)),
                        fill("acquired"),
                        Part::Phi(birth.format("%Y-%m-%d").to_string()),
                    ]),
                    body_part: pick(&mut rng, modality.body_parts()),
                    station: format!("STN{}", digits(&mut rng, 4)),
                    device_serial: format!("SN{}", digits(&mut rng, 8)),
                    operator: person_name(&mut rng),
                    manufacturer: pick(&mut rng, MANUFACTURERS),
                    frame_of_reference: fresh_uid(&mut rng),
                    rows: *side.choose(&mut rng).unwrap(),
                    columns: *side.choose(&mut rng).unwrap(),
                    syntax: if rng.gen_bool(spec.implicit_fraction) {
                        TransferSyntax::ImplicitVrLittleEndian
                    } else {
                        TransferSyntax::ExplicitVrLittleEndian
                    },
                };
                let n_inst = rng.gen_range(spec.instances_per_series.clone());
                for i in 0..n_inst {
                    let sop = fresh_uid(&mut rng);
                    let content = date + Duration::days(rng.gen_range(0..2));
                    let burned = modality.may_burn_in() && rng.gen_bool(spec.burnin_fraction);
                    let file_name = format!("{}/{}/{}/{}.dcm", who.patient_id, study.uid, series.uid, sop);
                    let ctx = InstanceCtx {
                        modality,
                        patient: &who.patient_id,
                        study: &study.uid,
                        series: &series.uid,
                        instance: &sop,
                        file_name: &file_name,
                    };
                    let (ds, boxes) = build_instance(
                        &mut rng, &who, &study, &series, modality, &sop, i, content, burned, &mut key, &ctx,
                    );
                    for b in &boxes {
                        regions.push(RedactionRegion::new(&sop, b.x0, b.y0, b.x1, b.y1));
                    }
                    uids.extend([sop.clone(), study.uid.clone(), series.uid.clone()]);
                    if modality.has_pixels() {
                        uids.insert(series.frame_of_reference.clone());
                    }
                    write_file(out.join(&file_name), &DicomFile::new(series.syntax, ds))?;
                    files += 1;
                }
            }
        }
    }

    let vault = IdentityVault::new(spec.seed);
    let mut patid_truth = BTreeMap::new();
    for id in &patient_ids {
        patid_truth.insert(id.clone(), vault.map_patient_id(id)?);
    }
    let mut uid_truth = BTreeMap::new();
    for u in &uids {
        uid_truth.insert(u.clone(), vault.remap_uid(u)?);
    }

    std::fs::create_dir_all(out).map_err(|source| CorpusError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let key = AnswerKey::new(key.entries)?;
    write_answer_key(&out.join(KEY_FILE), &key)?;
    write_mapping(&out.join(TRUTH_PATID_FILE), &patid_truth)?;
    write_mapping(&out.join(TRUTH_UID_FILE), &uid_truth)?;
    let regions_path = out.join(REGIONS_FILE);
    std::fs::write(&regions_path, regions_csv(&regions)).map_err(|source| CorpusError::Io {
        path: regions_path,
        source,
    })?;
    Ok(GeneratedCorpus {
        root: out.to_path_buf(),
        key,
        patid_truth,
        uid_truth,
        regions,
        files,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_instance(
    rng: &mut ChaCha8Rng,
    who: &SyntheticIdentity,
    study: &StudyInfo,
    series: &SeriesInfo,
    modality: Modality,
    sop: &str,
    index: usize,
    content: NaiveDate,
    burned: bool,
    key: &mut KeyBuilder,
    ctx: &InstanceCtx<'_>,
) -> (Dataset, Vec<PixelBox>) {
    use ActionType::*;
    let t = |tag, vr, v: &str| DataElement::text(tag, vr, v);
    let age = (study.date.year() - NaiveDate::parse_from_str(&who.birth_date, "%Y%m%d").unwrap().year()).max(0);
    let request = Dataset::from_iter([
        t(tags::REQUESTED_PROCEDURE_DESCRIPTION, Vr::LO, &study.procedure.value),
        t(tags::REQUESTED_PROCEDURE_ID, Vr::SH, &study.study_id),
    ]);
    let mut ds: Dataset = [
        t(SPECIFIC_CHARACTER_SET, Vr::CS, "ISO_IR 100"),
        t(tags::SOP_CLASS_UID, Vr::UI, modality.sop_class()),
        t(tags::SOP_INSTANCE_UID, Vr::UI, sop),
        t(tags::STUDY_DATE, Vr::DA, &da(study.date)),
        t(tags::SERIES_DATE, Vr::DA, &da(study.date)),
        t(tags::CONTENT_DATE, Vr::DA, &da(content)),
        t(tags::STUDY_TIME, Vr::TM, "093000"),
        t(tags::ACCESSION_NUMBER, Vr::SH, &study.accession),
        t(tags::MODALITY, Vr::CS, modality.code()),
        t(tags::MANUFACTURER, Vr::LO, series.manufacturer),
        t(tags::INSTITUTION_NAME, Vr::LO, study.institution),
        t(tags::REFERRING_PHYSICIAN_NAME, Vr::PN, &study.referring),
        t(tags::STATION_NAME, Vr::SH, &series.station),
        t(tags::STUDY_DESCRIPTION, Vr::LO, &study.description.value),
        t(tags::SERIES_DESCRIPTION, Vr::LO, &series.description.value),
        t(tags::OPERATORS_NAME, Vr::PN, &series.operator),
        t(PRIVATE_CREATOR_TAG, Vr::LO, PRIVATE_CREATOR),
        t(PRIVATE_SAFE_TAG, Vr::LO, "PROTOCOL^STANDARD"),
        t(PRIVATE_PHI_TAG, Vr::LO, &format!("INTERNAL REF {}", who.record_number)),
        t(tags::PATIENT_NAME, Vr::PN, &who.name),
        t(tags::PATIENT_ID, Vr::LO, &who.patient_id),
        t(tags::PATIENT_BIRTH_DATE, Vr::DA, &who.birth_date),
        t(tags::PATIENT_SEX, Vr::CS, who.sex),
        t(tags::OTHER_PATIENT_IDS, Vr::LO, &who.other_id),
        t(tags::PATIENT_AGE, Vr::AS, &format!("{age:03}Y")),
        t(tags::PATIENT_ADDRESS, Vr::LO, &who.address),
        t(tags::PATIENT_TELEPHONE_NUMBERS, Vr::SH, &who.phone),
        t(tags::ADDITIONAL_PATIENT_HISTORY, Vr::LT, &who.free_text_snippets[0]),
        t(tags::BODY_PART_EXAMINED, Vr::CS, series.body_part),
        t(tags::DEVICE_SERIAL_NUMBER, Vr::LO, &series.device_serial),
        t(tags::STUDY_INSTANCE_UID, Vr::UI, &study.uid),
        t(tags::SERIES_INSTANCE_UID, Vr::UI, &series.uid),
        t(tags::STUDY_ID, Vr::SH, &study.study_id),
        t(tags::SERIES_NUMBER, Vr::IS, &series.number.to_string()),
        t(tags::INSTANCE_NUMBER, Vr::IS, &(index + 1).to_string()),
        DataElement::sequence(tags::REQUEST_ATTRIBUTES_SEQUENCE, vec![request]),
    ]
    .into_iter()
    .collect();

    let mut boxes = Vec::new();
    if modality.has_pixels() {
        let bits = modality.bits();
        let (rows, columns) = (series.rows, series.columns);
        let mut px = noise(rng, rows, columns, bits);
        if burned {
            boxes = glyph_boxes(rng, rows, columns);
            for b in &boxes {
                burn_glyphs(&mut px, columns, bits, b);
            }
        }
        let us = |tag, v: usize| DataElement::ints(tag, Vr::US, vec![v as i64]);
        for e in [
            t(tags::IMAGE_TYPE, Vr::CS, "ORIGINAL\\PRIMARY\\AXIAL"),
            t(tags::FRAME_OF_REFERENCE_UID, Vr::UI, &series.frame_of_reference),
            us(tags::SAMPLES_PER_PIXEL, 1),
            t(tags::PHOTOMETRIC_INTERPRETATION, Vr::CS, "MONOCHROME2"),
            us(tags::ROWS, rows),
            us(tags::COLUMNS, columns),
            us(tags::BITS_ALLOCATED, bits),
            us(tags::BITS_STORED, if bits == 8 { 8 } else { 12 }),
            us(tags::HIGH_BIT, if bits == 8 { 7 } else { 11 }),
            us(tags::PIXEL_REPRESENTATION, 0),
            t(tags::BURNED_IN_ANNOTATION, Vr::CS, if burned { "YES" } else { "NO" }),
            DataElement::bytes(tags::PIXEL_DATA, if bits == 8 { Vr::OB } else { Vr::OW }, px),
        ] {
            ds.insert(e);
        }
    }

    key.simple(ctx, &ds, tags::STUDY_DATE, DateShifted, "HIPAA-C");
    key.simple(ctx, &ds, tags::PATIENT_BIRTH_DATE, DateShifted, "HIPAA-C");
    key.simple(ctx, &ds, tags::SERIES_DATE, DateShifted, "TCIA-P15-MOD-C");
    key.simple(ctx, &ds, tags::CONTENT_DATE, DateShifted, "TCIA-P15-MOD-C");
    key.simple(ctx, &ds, tags::PATIENT_ID, PatidConsistent, "HIPAA-H");
    for tag in [tags::STUDY_INSTANCE_UID, tags::SERIES_INSTANCE_UID, tags::SOP_INSTANCE_UID] {
        key.simple(ctx, &ds, tag, UidChanged, "DICOM-P15-BASIC-U");
        key.simple(ctx, &ds, tag, UidConsistent, "DICOM-P15-BASIC-U");
    }
    key.simple(ctx, &ds, tags::MODALITY, TagRetained, "DICOM-IOD-1");
    key.simple(ctx, &ds, tags::SOP_CLASS_UID, TagRetained, "DICOM-IOD-1");
    key.simple(ctx, &ds, tags::BODY_PART_EXAMINED, TagRetained, "DICOM-IOD-2");
    key.simple(ctx, &ds, tags::SERIES_NUMBER, TagRetained, "DICOM-IOD-2");
    key.simple(ctx, &ds, tags::PATIENT_SEX, TagRetained, "TCIA-P15-PAT-K");
    key.simple(ctx, &ds, tags::PATIENT_AGE, TagRetained, "TCIA-P15-PAT-K");
    key.simple(ctx, &ds, tags::MANUFACTURER, TagRetained, "TCIA-P15-DEV-K");
    key.simple(ctx, &ds, PRIVATE_SAFE_TAG, TagRetained, "TCIA-PTKB-K");
    key.simple(ctx, &ds, tags::PATIENT_NAME, TextNotnull, "DICOM-IOD-2");

    let top = ElementPath::top;
    key.removed(ctx, top(tags::PATIENT_NAME), &who.name, vec![who.name.clone()], "HIPAA-A");
    key.removed(ctx, top(tags::PATIENT_ADDRESS), &who.address, all_tokens(&who.address), "HIPAA-B");
    key.removed(ctx, top(tags::PATIENT_TELEPHONE_NUMBERS), &who.phone, vec![who.phone.clone()], "HIPAA-D");
    key.removed(ctx, top(tags::ACCESSION_NUMBER), &study.accession, vec![study.accession.clone()], "HIPAA-R");
    key.removed(ctx, top(tags::INSTITUTION_NAME), study.institution, all_tokens(study.institution), "TCIA-P15-BASIC-D");
    key.removed(ctx, top(tags::OTHER_PATIENT_IDS), &who.other_id, vec![who.other_id.clone()], "TCIA-P15-BASIC-X");
    key.removed(ctx, top(tags::STATION_NAME), &series.station, vec![series.station.clone()], "TCIA-P15-BASIC-X/Z/D");
    key.removed(ctx, top(tags::REFERRING_PHYSICIAN_NAME), &study.referring, vec![study.referring.clone()], "TCIA-P15-BASIC-Z");
    key.removed(ctx, top(tags::OPERATORS_NAME), &series.operator, vec![series.operator.clone()], "TCIA-P15-BASIC-Z/D");
    key.removed(ctx, top(tags::DEVICE_SERIAL_NUMBER), &series.device_serial, vec![series.device_serial.clone()], "TCIA-P15-DEV-C");
    let private = format!("INTERNAL REF {}", who.record_number);
    key.removed(ctx, top(PRIVATE_PHI_TAG), &private, vec![who.record_number.clone()], "TCIA-PTKB-X");

    key.free_text(ctx, top(tags::STUDY_DESCRIPTION), &study.description, "HIPAA-G");
    key.free_text(ctx, top(tags::SERIES_DESCRIPTION), &series.description, "DICOM-P15-BASIC-C");
    let history = compose_history(&who.free_text_snippets[0], &who.patient_id);
    key.free_text(ctx, top(tags::ADDITIONAL_PATIENT_HISTORY), &history, "DICOM-P15-BASIC-C");
    let nested = ElementPath::nested(
        vec![(tags::REQUEST_ATTRIBUTES_SEQUENCE, 0)],
        tags::REQUESTED_PROCEDURE_DESCRIPTION,
    );
    key.free_text(ctx, nested, &study.procedure, "DICOM-P15-BASIC-C");

    if modality.has_pixels() {
        key.simple(ctx, &ds, tags::ROWS, TagRetained, "DICOM-IOD-1");
        key.simple(ctx, &ds, tags::COLUMNS, TagRetained, "DICOM-IOD-1");
        key.simple(ctx, &ds, tags::IMAGE_TYPE, TextNotnull, "DICOM-IOD-1");
        key.simple(ctx, &ds, tags::FRAME_OF_REFERENCE_UID, UidChanged, "DICOM-P15-BASIC-U");
        let digest = pixel_digest(ds.get(tags::PIXEL_DATA).and_then(|e| e.as_bytes()).unwrap_or(&[]));
        if burned {
            key.push(
                ctx,
                top(tags::PIXEL_DATA),
                digest,
                PixelsHidden,
                vec![who.name.clone(), who.patient_id.clone()],
                "TCIA-REV",
                boxes.clone(),
            );
        } else {
            key.push(ctx, top(tags::PIXEL_DATA), digest, PixelsRetained, Vec::new(), "TCIA-P15-PIX-K", Vec::new());
        }
    }
    (ds, boxes)
}

fn compose_history(snippet: &str, patient_id: &str) -> FreeText {
    compose(
        snippet
            .split(' ')
            .map(|w| {
                if w == patient_id {
                    Part::Phi(w.to_string())
                } else {
                    fill(w)
                }
            })
            .collect(),
    )
}

/// Checks every key entry against the files under `root`. Returns one
/// message per disagreeing entry.
pub fn self_validate(root: &Path, key: &AnswerKey) -> Result<Vec<String>, CorpusError> {
    let mut mismatches = Vec::new();
    let mut cache: Option<(String, DicomFile)> = None;
    for e in key.entries() {
        if cache.as_ref().map(|(n, _)| n.as_str()) != Some(e.file_name.as_str()) {
            let path = root.join(&e.file_name);
            match read_file(&path, true) {
                Ok(f) => cache = Some((e.file_name.clone(), f)),
                Err(err) => {
                    mismatches.push(format!("entry {}: cannot read {}: {err}", e.index, path.display()));
                    cache = None;
                    continue;
                }
            }
        }
        let (_, file) = cache.as_ref().expect("cached file");
        if file.sop_instance_uid() != Some(e.instance.as_str()) {
            mismatches.push(format!("entry {}: {} is not instance {}", e.index, e.file_name, e.instance));
            continue;
        }
        let element = file.dataset.get_path(&e.tag_ds);
        let actual = match e.action {
            ActionType::PixelsHidden | ActionType::PixelsRetained => {
                element.and_then(|el| el.as_bytes()).map(pixel_digest)
            }
            _ => element.map(|el| el.to_text()),
        };
        if actual.as_deref() != Some(e.answer_value.as_str()) {
            mismatches.push(format!(
                "entry {}: {} {} expected {:?}, found {:?}",
                e.index, e.file_name, e.tag_ds, e.answer_value, actual
            ));
        }
    }
    Ok(mismatches)
}

/// [`self_validate`], turning any mismatch into an error.
pub fn ensure_valid(root: &Path, key: &AnswerKey) -> Result<(), CorpusError> {
    let m = self_validate(root, key)?;
    if m.is_empty() {
        Ok(())
    } else {
        Err(CorpusError::ValidationFailure(m))
    }
}
