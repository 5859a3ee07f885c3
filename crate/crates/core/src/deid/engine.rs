use sha2::{Digest, Sha256};

use super::{
    dates, redact_pixels, scrub_text, DeidError, DeidPolicy, IdentityVault, PolicyAction,
    RedactionRegion, ScrubberConfig,
};
use crate::dicom::pixels::PixelGeometry;
use crate::dicom::{
    tags, DataElement, Dataset, DicomFile, ElementPath, Tag, Value, Vr, IMPLEMENTATION_CLASS_UID,
    IMPLEMENTATION_VERSION_NAME,
};

/// Audit record for one visited element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedAction {
    pub path: ElementPath,
    pub tag: Tag,
    pub action: &'static str,
    /// Short digest of the value before; empty when the element was absent.
    pub before: String,
    pub after: String,
    /// Tokens removed by `clean_text`.
    pub removed_tokens: Vec<String>,
}

fn digest(e: Option<&DataElement>) -> String {
    let Some(e) = e else {
        return String::new();
    };
    let mut h = Sha256::new();
    h.update(e.vr().code());
    match e.value() {
        Value::Bytes(b) => h.update(b),
        Value::Sequence(items) => h.update(format!("SQ:{}", items.len())),
        _ => h.update(e.to_text()),
    }
    hex::encode(&h.finalize()[..8])
}

struct Ctx<'a> {
    policy: &'a DeidPolicy,
    vault: &'a IdentityVault,
    scrub: ScrubberConfig,
    regions: Vec<&'a RedactionRegion>,
    geometry: Option<PixelGeometry>,
    offset_days: i64,
    log: Vec<AppliedAction>,
}

/// De-identifies one file. Returns the new file and one audit record per
/// visited element, in walk order.
pub fn deidentify(
    file: &DicomFile,
    policy: &DeidPolicy,
    vault: &IdentityVault,
    scrub: &ScrubberConfig,
    regions: &[RedactionRegion],
) -> Result<(DicomFile, Vec<AppliedAction>), DeidError> {
    let ds = &file.dataset;
    let offset_key = ds
        .text(tags::PATIENT_ID)
        .or_else(|| ds.text(tags::STUDY_INSTANCE_UID))
        .unwrap_or("");
    let instance = file.sop_instance_uid();
    let mut ctx = Ctx {
        policy,
        vault,
        scrub: scrub.for_dataset(ds),
        regions: regions
            .iter()
            .filter(|r| Some(r.instance_uid.as_str()) == instance)
            .collect(),
        geometry: PixelGeometry::from_dataset(ds),
        offset_days: vault.derive_offset(offset_key),
        log: Vec::new(),
    };
    let dataset = ctx.process(ds, &mut Vec::new())?;

    let mut meta = file.meta.clone();
    meta.remove(tags::FILE_META_GROUP_LENGTH);
    meta.remove(Tag::new(0x0002, 0x0016));
    match dataset.text(tags::SOP_INSTANCE_UID) {
        Some(uid) => {
            meta.insert(DataElement::text(tags::MEDIA_STORAGE_SOP_INSTANCE_UID, Vr::UI, uid));
        }
        None => {
            if let Some(uid) = meta.text(tags::MEDIA_STORAGE_SOP_INSTANCE_UID) {
                let new = vault.remap_uid(uid)?;
                meta.insert(DataElement::text(tags::MEDIA_STORAGE_SOP_INSTANCE_UID, Vr::UI, new));
            }
        }
    }
    if let Some(class) = dataset.text(tags::SOP_CLASS_UID) {
        meta.insert(DataElement::text(tags::MEDIA_STORAGE_SOP_CLASS_UID, Vr::UI, class));
    }
    meta.insert(DataElement::text(
        tags::IMPLEMENTATION_CLASS_UID,
        Vr::UI,
        IMPLEMENTATION_CLASS_UID,
    ));
    meta.insert(DataElement::text(
        tags::IMPLEMENTATION_VERSION_NAME,
        Vr::SH,
        IMPLEMENTATION_VERSION_NAME,
    ));
    let out = DicomFile::from_parts(meta, dataset)?;
    Ok((out, ctx.log))
}

impl Ctx<'_> {
    fn process(
        &mut self,
        level: &Dataset,
        ancestors: &mut Vec<(Tag, usize)>,
    ) -> Result<Dataset, DeidError> {
        let mut out = Dataset::new();
        for e in level.iter() {
            let path = ElementPath::nested(ancestors.clone(), e.tag());
            let action = self.policy.resolve(e, level).clone();
            if !action.allowed_for(e.vr()) {
                return Err(DeidError::PolicyConflict {
                    path: path.to_string(),
                    action: action.to_string(),
                    vr: e.vr().code(),
                });
            }
            let before = digest(Some(e));
            let mut label = action.name();
            let mut removed_tokens = Vec::new();
            let result = match &action {
                PolicyAction::Keep => match e.items() {
                    Some(items) => {
                        let mut new_items = Vec::with_capacity(items.len());
                        for (i, item) in items.iter().enumerate() {
                            ancestors.push((e.tag(), i));
                            let r = self.process(item, ancestors);
                            ancestors.pop();
                            new_items.push(r?);
                        }
                        Some(DataElement::sequence(e.tag(), new_items))
                    }
                    None => Some(e.clone()),
                },
                PolicyAction::Remove => None,
                PolicyAction::Empty => Some(DataElement::empty(e.tag(), e.vr())),
                PolicyAction::ReplaceFixed(text) => Some(DataElement::text(e.tag(), e.vr(), text)),
                PolicyAction::HashUid => Some(self.map_text(e, |v| self.vault.remap_uid(v))?),
                PolicyAction::MapPatientId => Some(self.map_text(e, |v| self.vault.map_patient_id(v))?),
                PolicyAction::ShiftDate => match e.as_str() {
                    None => Some(e.clone()),
                    Some(v) => match dates::shift_date(v, e.vr(), self.offset_days) {
                        Ok(s) => Some(DataElement::text(e.tag(), e.vr(), s)),
                        Err(DeidError::UnparseableDate(_)) => {
                            label = "empty_unparseable_date";
                            Some(DataElement::empty(e.tag(), e.vr()))
                        }
                        Err(other) => return Err(other),
                    },
                },
                PolicyAction::CleanText => match e.as_str() {
                    None => Some(e.clone()),
                    Some(v) => {
                        let (cleaned, removed) = scrub_text(v, &self.scrub);
                        if removed.is_empty() {
                            Some(e.clone())
                        } else {
                            removed_tokens = removed;
                            Some(DataElement::text(e.tag(), e.vr(), cleaned))
                        }
                    }
                },
                PolicyAction::RedactPixels => Some(self.redact(e, &path)?),
            };
            let after = digest(result.as_ref());
            self.log.push(AppliedAction {
                path,
                tag: e.tag(),
                action: label,
                before,
                after,
                removed_tokens,
            });
            if let Some(r) = result {
                out.insert(r);
            }
        }
        Ok(out)
    }

    fn map_text(
        &self,
        e: &DataElement,
        f: impl Fn(&str) -> Result<String, DeidError>,
    ) -> Result<DataElement, DeidError> {
        let Some(v) = e.as_str() else {
            return Ok(e.clone());
        };
        let mapped = v
            .split('\\')
            .map(|part| f(part.trim()))
            .collect::<Result<Vec<_>, _>>()?
            .join("\\");
        Ok(DataElement::text(e.tag(), e.vr(), mapped))
    }

    fn redact(&self, e: &DataElement, path: &ElementPath) -> Result<DataElement, DeidError> {
        if self.regions.is_empty() || !path.is_top_level() || e.tag() != tags::PIXEL_DATA {
            return Ok(e.clone());
        }
        let geom = self.geometry.ok_or(DeidError::MissingPixelGeometry)?;
        let Some(bytes) = e.as_bytes() else {
            return Ok(e.clone());
        };
        let redacted = redact_pixels(bytes, &geom, &self.regions)?;
        Ok(DataElement::bytes(e.tag(), e.vr(), redacted))
    }
}
