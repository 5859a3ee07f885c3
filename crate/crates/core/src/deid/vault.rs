use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::RwLock;

use sha2::{Digest, Sha256};

use super::DeidError;

pub const DEFAULT_UID_ROOT: &str = "2.25";
const MAX_UID_LEN: usize = 64;
const MAX_ROOT_LEN: usize = 32;

#[derive(Default)]
struct Table {
    forward: BTreeMap<String, String>,
    reverse: HashMap<String, String>,
}

impl Table {
    /// Get-or-insert keeping the table injective.
    fn get_or_insert(
        &mut self,
        original: &str,
        make: impl FnOnce() -> String,
    ) -> Result<String, DeidError> {
        if let Some(r) = self.forward.get(original) {
            return Ok(r.clone());
        }
        let replacement = make();
        if let Some(other) = self.reverse.get(&replacement) {
            return Err(DeidError::VaultCollision {
                replacement,
                first: other.clone(),
                second: original.to_string(),
            });
        }
        self.forward.insert(original.to_string(), replacement.clone());
        self.reverse.insert(replacement.clone(), original.to_string());
        Ok(replacement)
    }
}

#[derive(Default)]
struct Tables {
    patid: Table,
    uid: Table,
    date_offsets: BTreeMap<String, i64>,
}

/// Consistent replacement identities for one de-identification run.
///
/// Every replacement is a keyed digest of `(seed, original)`, so results do
/// not depend on the order in which files are processed.
pub struct IdentityVault {
    uid_root: String,
    seed: u64,
    tables: RwLock<Tables>,
}

fn valid_uid(uid: &str) -> bool {
    !uid.is_empty()
        && uid.len() <= MAX_UID_LEN
        && uid.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        && !uid.starts_with('.')
        && !uid.ends_with('.')
        && !uid.contains("..")
}

impl IdentityVault {
    pub fn new(seed: u64) -> Self {
        Self::with_root(seed, DEFAULT_UID_ROOT).expect("default root is valid")
    }

    pub fn with_root(seed: u64, uid_root: &str) -> Result<Self, DeidError> {
        if !valid_uid(uid_root) || uid_root.len() > MAX_ROOT_LEN {
            return Err(DeidError::InvalidUid(uid_root.to_string()));
        }
        Ok(IdentityVault {
            uid_root: uid_root.to_string(),
            seed,
            tables: RwLock::new(Tables::default()),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uid_root(&self) -> &str {
        &self.uid_root
    }

    fn digest(&self, domain: &str, value: &str) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(domain.as_bytes());
        h.update([0]);
        h.update(value.as_bytes());
        h.finalize().into()
    }

    fn read<T>(&self, f: impl FnOnce(&Tables) -> T) -> T {
        f(&self.tables.read().unwrap_or_else(|e| e.into_inner()))
    }

    fn write<T>(&self, f: impl FnOnce(&mut Tables) -> T) -> T {
        f(&mut self.tables.write().unwrap_or_else(|e| e.into_inner()))
    }

    /// Replacement UID: root, a dot, and the decimal form of a 128-bit keyed
    /// digest, cut to 64 characters.
    pub fn remap_uid(&self, uid: &str) -> Result<String, DeidError> {
        let uid = uid.trim_end_matches(['\0', ' ']);
        if !valid_uid(uid) {
            return Err(DeidError::InvalidUid(uid.to_string()));
        }
        if let Some(r) = self.read(|t| t.uid.forward.get(uid).cloned()) {
            return Ok(r);
        }
        let d = self.digest("uid", uid);
        let n = u128::from_be_bytes(d[..16].try_into().expect("16 bytes"));
        let mut out = format!("{}.{}", self.uid_root, n);
        out.truncate(MAX_UID_LEN);
        self.write(|t| t.uid.get_or_insert(uid, || out))
    }

    pub fn map_patient_id(&self, patient_id: &str) -> Result<String, DeidError> {
        let id = patient_id.trim();
        if let Some(r) = self.read(|t| t.patid.forward.get(id).cloned()) {
            return Ok(r);
        }
        let d = self.digest("patid", id);
        let out = format!("DEID{}", hex::encode_upper(&d[..6]));
        self.write(|t| t.patid.get_or_insert(id, || out))
    }

    /// Per-patient date offset in days, uniform over `[-3650, -1]`.
    pub fn derive_offset(&self, patient_id: &str) -> i64 {
        if let Some(o) = self.read(|t| t.date_offsets.get(patient_id).copied()) {
            return o;
        }
        let d = self.digest("date", patient_id);
        let n = u64::from_be_bytes(d[..8].try_into().expect("8 bytes"));
        let offset = -((n % 3650) as i64) - 1;
        self.write(|t| *t.date_offsets.entry(patient_id.to_string()).or_insert(offset))
    }

    pub fn patid_map(&self) -> BTreeMap<String, String> {
        self.read(|t| t.patid.forward.clone())
    }

    pub fn uid_map(&self) -> BTreeMap<String, String> {
        self.read(|t| t.uid.forward.clone())
    }

    pub fn date_offsets(&self) -> BTreeMap<String, i64> {
        self.read(|t| t.date_offsets.clone())
    }

    /// Writes `patid.csv` and `uid.csv` into `dir`.
    pub fn export_mappings(&self, dir: &Path) -> Result<(), DeidError> {
        std::fs::create_dir_all(dir).map_err(|e| DeidError::io(dir, e))?;
        write_mapping(&dir.join("patid.csv"), &self.patid_map())?;
        write_mapping(&dir.join("uid.csv"), &self.uid_map())
    }
}

/// Mapping file body: header `original,replacement`, rows sorted by original.
pub fn mapping_csv(map: &BTreeMap<String, String>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["original", "replacement"]).expect("in-memory write");
    for (o, r) in map {
        w.write_record([o, r]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_mapping(path: &Path, map: &BTreeMap<String, String>) -> Result<(), DeidError> {
    let mut f = std::fs::File::create(path).map_err(|e| DeidError::io(path, e))?;
    f.write_all(&mapping_csv(map))
        .map_err(|e| DeidError::io(path, e))
}


#[cfg(test)]
mod table_tests {
    use super::*;

    #[test]
    fn collisions_are_refused() {
        let mut t = Table::default();
        t.get_or_insert("a", || "X".into()).unwrap();
        let err = t.get_or_insert("b", || "X".into()).unwrap_err();
        assert!(matches!(err, DeidError::VaultCollision { .. }));
        assert_eq!(t.forward.len(), 1);
    }
}
