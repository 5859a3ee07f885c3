#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use midib_deid::answer_key::{load_mapping, ActionType, MappingKind, MappingTable};
use midib_deid::corpus::{generate, CorpusSpec, GeneratedCorpus, REGIONS_FILE};
use midib_deid::deid::{
    deidentify_corpus, list_dicom_files, load_regions, DeidPolicy, DeidRun, IdentityVault,
    ScrubberConfig,
};
use midib_deid::dicom::{read_file, DataElement, Dataset, Tag, Value, Vr};
use midib_deid::scorer::{score_submission, AggregationMode, ScoreOptions, ScoreOutcome};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Per-action totals of the reference fixture, in report order.
pub const TABLE_TOTALS: [u64; 10] = [2306, 429, 15, 29471, 121690, 85323, 5816, 254949, 40633, 40633];

/// Per-team series-mode errors, in report order.
pub const TEAM_ERRORS: [(&str, [u64; 10]); 10] = [
    ("T-01", [1, 93, 0, 32, 10, 74, 323, 208, 1, 1]),
    ("T-02", [3, 0, 11, 7, 0, 74, 142, 196, 0, 0]),
    ("T-03", [3, 35, 12, 259, 1069, 638, 420, 2526, 128, 268]),
    ("T-04", [16, 14, 1, 0, 545, 340, 386, 1131, 2, 203]),
    ("T-05", [1, 0, 0, 34, 0, 68, 103, 310, 1, 1]),
    ("T-06", [2, 0, 0, 0, 8, 12, 326, 131, 4, 4]),
    ("T-07", [18, 0, 8, 864, 187, 71, 245, 3587, 116, 7019]),
    ("T-08", [3, 0, 0, 69, 89, 74, 1338, 310, 0, 0]),
    ("T-09", [2, 0, 1, 0, 19, 106, 341, 201, 0, 0]),
    ("T-10", [2, 0, 3, 0, 89, 71, 421, 1863, 0, 0]),
];

pub fn team_counts(team: &str) -> Vec<(ActionType, u64, u64)> {
    let (_, errors) = TEAM_ERRORS.iter().find(|(t, _)| *t == team).expect("known team");
    ActionType::ALL
        .iter()
        .zip(errors.iter().zip(TABLE_TOTALS))
        .map(|(&a, (&e, t))| (a, e, t))
        .collect()
}

/// A generated corpus and its de-identified copy.
pub struct Pipeline {
    pub dir: tempfile::TempDir,
    pub orig: PathBuf,
    pub sub: PathBuf,
    pub corpus: GeneratedCorpus,
    pub patid: MappingTable,
    pub uids: MappingTable,
}

impl Pipeline {
    pub fn build(spec: &CorpusSpec) -> Pipeline {
        let dir = tempfile::tempdir().unwrap();
        let orig = dir.path().join("orig");
        let sub = dir.path().join("sub");
        let corpus = generate(spec, &orig).unwrap();
        let regions = load_regions(&orig.join(REGIONS_FILE)).unwrap();
        let policy = DeidPolicy::builtin();
        let scrub = ScrubberConfig::default();
        let run = DeidRun { policy: &policy, scrub: &scrub, regions: &regions, lenient: false };
        deidentify_corpus(&orig, &sub, &run, &IdentityVault::new(spec.seed), 4).unwrap();
        let patid = load_mapping(&sub.join("patid.csv"), MappingKind::PatientId).unwrap();
        let uids = load_mapping(&sub.join("uid.csv"), MappingKind::Uid).unwrap();
        Pipeline { dir, orig, sub, corpus, patid, uids }
    }

    pub fn score(&self, mode: AggregationMode) -> ScoreOutcome<'_> {
        let options = ScoreOptions { mode, ..ScoreOptions::default() };
        score_submission(&self.corpus.key, &self.orig, &self.sub, &self.patid, &self.uids, &options)
            .unwrap()
    }

    /// Submitted file paths keyed by their SOP Instance UID.
    pub fn submitted_files(&self) -> HashMap<String, PathBuf> {
        list_dicom_files(&self.sub)
            .unwrap()
            .into_iter()
            .map(|p| {
                let uid = read_file(&p, false).unwrap().sop_instance_uid().unwrap().to_string();
                (uid, p)
            })
            .collect()
    }

    /// Path of the de-identified counterpart of an original instance.
    pub fn submitted_for(&self, files: &HashMap<String, PathBuf>, instance: &str) -> PathBuf {
        let new_uid = self.uids.get(instance).expect("instance remapped");
        files[new_uid].clone()
    }

    pub fn original(&self, file_name: &str) -> PathBuf {
        self.orig.join(file_name)
    }
}

pub fn seed_spec(n_patients: usize, seed: u64) -> CorpusSpec {
    CorpusSpec { n_patients, seed, ..CorpusSpec::default() }
}

/// Restores a file's bytes when dropped.
pub struct Restore {
    path: PathBuf,
    bytes: Vec<u8>,
}

impl Restore {
    pub fn new(path: &Path) -> Restore {
        Restore { path: path.to_path_buf(), bytes: std::fs::read(path).unwrap() }
    }
}

impl Drop for Restore {
    fn drop(&mut self) {
        std::fs::write(&self.path, &self.bytes).unwrap();
    }
}

const WORDS: [&str; 8] = ["ALPHA", "beta", "C3", "delta^x", "E=5", "foo bar", "G", "héllo"];

fn word(rng: &mut ChaCha8Rng) -> String {
    WORDS.choose(rng).unwrap().to_string()
}

fn digits(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect()
}

fn random_value(rng: &mut ChaCha8Rng, vr: Vr, depth: usize) -> Value {
    if vr != Vr::SQ && rng.gen_bool(0.05) {
        return Value::Empty;
    }
    let n = rng.gen_range(1..=3);
    match vr {
        Vr::AE | Vr::CS | Vr::SH => Value::Text(format!("{}_{}", word(rng).to_uppercase().replace(' ', "_"), digits(rng, 2))),
        Vr::AS => Value::Text(format!("{}Y", digits(rng, 3))),
        Vr::DA => Value::Text(format!("19{}0{}1{}", digits(rng, 2), rng.gen_range(1..10), rng.gen_range(0..10))),
        Vr::DT => {
            let n = rng.gen_range(2..=10);
            Value::Text(format!("2020{}", digits(rng, n)))
        }
        Vr::TM => {
            let n = rng.gen_range(2..=6);
            Value::Text(digits(rng, n))
        }
        Vr::DS => Value::Text((0..n).map(|_| format!("{}.{}", digits(rng, 2), digits(rng, 1))).collect::<Vec<_>>().join("\\")),
        Vr::IS => Value::Text((0..n).map(|_| rng.gen_range(-999..999).to_string()).collect::<Vec<_>>().join("\\")),
        Vr::UI => Value::Text(format!("1.2.{}.{}", rng.gen_range(1..99999), rng.gen_range(1..999))),
        Vr::PN => Value::Text(format!("{}^{}", word(rng), word(rng))),
        Vr::LO | Vr::LT | Vr::ST | Vr::UT => {
            let words: Vec<String> = (0..rng.gen_range(1..8)).map(|_| word(rng)).collect();
            Value::Text(words.join(" "))
        }
        Vr::US => Value::Ints((0..n).map(|_| rng.gen_range(0..=u16::MAX as i64)).collect()),
        Vr::SS => Value::Ints((0..n).map(|_| rng.gen_range(i16::MIN as i64..=i16::MAX as i64)).collect()),
        Vr::UL => Value::Ints((0..n).map(|_| rng.gen_range(0..=u32::MAX as i64)).collect()),
        Vr::SL => Value::Ints((0..n).map(|_| rng.gen_range(i32::MIN as i64..=i32::MAX as i64)).collect()),
        Vr::AT => Value::Ints((0..n).map(|_| rng.gen_range(0x0008_0000..=0x7FE0_0010)).collect()),
        Vr::FL => Value::Decimals((0..n).map(|_| rng.gen_range(-4096..4096) as f64 / 8.0).collect()),
        Vr::FD => Value::Decimals((0..n).map(|_| rng.gen::<f64>() * 1e6 - 5e5).collect()),
        Vr::OB | Vr::OW | Vr::UN => {
            let len = rng.gen_range(1..40);
            Value::Bytes((0..len).map(|_| rng.gen()).collect())
        }
        Vr::SQ => {
            let items = if depth >= 3 { 0 } else { rng.gen_range(0..=2) };
            Value::Sequence((0..items).map(|_| random_dataset(rng, depth + 1)).collect())
        }
    }
}

/// A dataset exercising every VR, private blocks and nested sequences up
/// to depth 3 (depth 0 is the top level).
pub fn random_dataset(rng: &mut ChaCha8Rng, depth: usize) -> Dataset {
    let mut ds = Dataset::new();
    let count = if depth == 0 { Vr::ALL.len() + 4 } else { rng.gen_range(1..6) };
    for i in 0..count {
        let vr = if depth == 0 && i < Vr::ALL.len() { Vr::ALL[i] } else { *Vr::ALL.choose(rng).unwrap() };
        let group = 2 * rng.gen_range(4..0x3000u16);
        let tag = Tag::new(group, rng.gen_range(0x0001..=0xFFFE));
        ds.insert(DataElement::new(tag, vr, random_value(rng, vr, depth)).unwrap());
    }
    if rng.gen_bool(0.7) {
        let group = 2 * rng.gen_range(4..0x3000u16) + 1;
        ds.insert(DataElement::text(Tag::new(group, 0x0010), Vr::LO, "PRIVATE_CREATOR"));
        for e in 0..rng.gen_range(1..4u16) {
            let vr = *Vr::ALL.choose(rng).unwrap();
            let tag = Tag::new(group, 0x1000 + e);
            ds.insert(DataElement::new(tag, vr, random_value(rng, vr, depth)).unwrap());
        }
    }
    ds
}

fn long_length(vr: &[u8]) -> bool {
    matches!(vr, b"OB" | b"OW" | b"OF" | b"SQ" | b"UT" | b"UN")
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Walks an explicit VR little endian dataset independently of the library
/// reader. Returns the end offset and reports any tag that is not strictly
/// ascending within its level or any odd value length.
pub fn audit_explicit(b: &[u8], mut pos: usize, end: Option<usize>, faults: &mut Vec<String>) -> usize {
    let mut prev: Option<u32> = None;
    while end.map_or(pos < b.len(), |e| pos < e) {
        let tag = (u32::from(u16_at(b, pos)) << 16) | u32::from(u16_at(b, pos + 2));
        if tag == 0xFFFE_E00D {
            return pos + 8;
        }
        if prev.is_some_and(|p| p >= tag) {
            faults.push(format!("tag {tag:08X} after {:08X} at {pos}", prev.unwrap()));
        }
        prev = Some(tag);
        let vr = &b[pos + 4..pos + 6];
        let (len, header) = if long_length(vr) {
            (u32_at(b, pos + 8), 12)
        } else {
            (u32::from(u16_at(b, pos + 6)), 8)
        };
        pos += header;
        if vr == b"SQ" {
            if len != u32::MAX {
                faults.push(format!("defined-length sequence {tag:08X}"));
            }
            loop {
                let item = (u32::from(u16_at(b, pos)) << 16) | u32::from(u16_at(b, pos + 2));
                let item_len = u32_at(b, pos + 4);
                pos += 8;
                match item {
                    0xFFFE_E0DD => break,
                    0xFFFE_E000 if item_len == u32::MAX => pos = audit_explicit(b, pos, None, faults),
                    0xFFFE_E000 => {
                        let stop = pos + item_len as usize;
                        pos = audit_explicit(b, pos, Some(stop), faults);
                    }
                    other => {
                        faults.push(format!("unexpected {other:08X} in sequence"));
                        return b.len();
                    }
                }
            }
        } else {
            if len % 2 == 1 {
                faults.push(format!("odd length {len} for {tag:08X}"));
            }
            pos += len as usize;
        }
    }
    pos
}
