//! Per-tag de-identification rules and their text format.
//!
//! ```text
//! # comment
//! default_standard = keep
//! default_private  = remove
//! private_keep     = 0009,SYNTH_VENDOR,10
//! vr:UI            = hash_uid
//! (0010,0010)      = replace ANONYMOUS
//! (6000,0000)-(60FF,FFFF) = remove
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::DeidError;
use crate::dicom::{DataElement, Dataset, Tag, Vr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyAction {
    Keep,
    Remove,
    ReplaceFixed(String),
    Empty,
    HashUid,
    ShiftDate,
    MapPatientId,
    CleanText,
    RedactPixels,
}

impl PolicyAction {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyAction::Keep => "keep",
            PolicyAction::Remove => "remove",
            PolicyAction::ReplaceFixed(_) => "replace",
            PolicyAction::Empty => "empty",
            PolicyAction::HashUid => "hash_uid",
            PolicyAction::ShiftDate => "shift_date",
            PolicyAction::MapPatientId => "map_patient_id",
            PolicyAction::CleanText => "clean_text",
            PolicyAction::RedactPixels => "redact_pixels",
        }
    }

    /// Whether this action can be applied to an element of `vr`.
    pub fn allowed_for(&self, vr: Vr) -> bool {
        match self {
            PolicyAction::Keep | PolicyAction::Remove | PolicyAction::Empty => true,
            PolicyAction::HashUid => vr == Vr::UI,
            PolicyAction::ShiftDate => vr.is_temporal(),
            PolicyAction::CleanText => vr.is_free_text(),
            PolicyAction::MapPatientId | PolicyAction::ReplaceFixed(_) => vr.is_text(),
            PolicyAction::RedactPixels => matches!(vr, Vr::OB | Vr::OW),
        }
    }
}

impl fmt::Display for PolicyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyAction::ReplaceFixed(t) => write!(f, "replace {t}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PolicyAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let action = match head {
            "keep" => PolicyAction::Keep,
            "remove" => PolicyAction::Remove,
            "empty" => PolicyAction::Empty,
            "replace" => {
                let text = rest.trim();
                if text.is_empty() {
                    return Err("replace needs a value".into());
                }
                return Ok(PolicyAction::ReplaceFixed(text.to_string()));
            }
            "hash_uid" => PolicyAction::HashUid,
            "shift_date" => PolicyAction::ShiftDate,
            "map_patient_id" => PolicyAction::MapPatientId,
            "clean_text" => PolicyAction::CleanText,
            "redact_pixels" => PolicyAction::RedactPixels,
            other => return Err(format!("unknown action {other:?}")),
        };
        if !rest.trim().is_empty() {
            return Err(format!("{head} takes no parameter"));
        }
        Ok(action)
    }
}

/// A private attribute kept regardless of `default_private`: the element
/// offset `xx` within block `(gggg,??xx)` reserved by `creator`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrivateKey {
    pub group: u16,
    pub creator: String,
    pub offset: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeidPolicy {
    pub rules: BTreeMap<Tag, PolicyAction>,
    pub ranges: Vec<(Tag, Tag, PolicyAction)>,
    pub vr_rules: BTreeMap<&'static str, PolicyAction>,
    pub private_keep_list: BTreeSet<PrivateKey>,
    pub default_standard: PolicyAction,
    pub default_private: PolicyAction,
}

impl Default for DeidPolicy {
    /// Keeps everything.
    fn default() -> Self {
        DeidPolicy {
            rules: BTreeMap::new(),
            ranges: Vec::new(),
            vr_rules: BTreeMap::new(),
            private_keep_list: BTreeSet::new(),
            default_standard: PolicyAction::Keep,
            default_private: PolicyAction::Keep,
        }
    }
}

/// Text of the policy that ships with the crate.
pub const DEFAULT_POLICY: &str = include_str!("../../policies/default.policy");

impl DeidPolicy {
    pub fn builtin() -> Self {
        DEFAULT_POLICY.parse().expect("bundled policy parses")
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, DeidError> {
        std::fs::read_to_string(path)
            .map_err(|e| DeidError::io(path, e))?
            .parse()
    }

    /// The action for `element`, which lives in `level` (used to look up its
    /// private creator).
    pub fn resolve(&self, element: &DataElement, level: &Dataset) -> &PolicyAction {
        let tag = element.tag();
        if let Some(a) = self.rules.get(&tag) {
            return a;
        }
        if let Some((_, _, a)) = self.ranges.iter().find(|(lo, hi, _)| (*lo..=*hi).contains(&tag)) {
            return a;
        }
        if tag.is_private() {
            return if self.private_kept(tag, level) {
                &PolicyAction::Keep
            } else {
                &self.default_private
            };
        }
        self.vr_rules
            .get(element.vr().code())
            .unwrap_or(&self.default_standard)
    }

    fn private_kept(&self, tag: Tag, level: &Dataset) -> bool {
        let creator_of = |slot: Tag| -> Option<String> {
            level.get(slot).map(|e| e.to_text().trim().to_string())
        };
        if tag.is_private_creator() {
            let Some(creator) = creator_of(tag) else {
                return false;
            };
            return self
                .private_keep_list
                .iter()
                .any(|k| k.group == tag.group && k.creator == creator);
        }
        let Some(slot) = tag.private_creator_slot() else {
            return false;
        };
        let Some(creator) = creator_of(slot) else {
            return false;
        };
        self.private_keep_list.contains(&PrivateKey {
            group: tag.group,
            creator,
            offset: (tag.element & 0xFF) as u8,
        })
    }
}

fn parse_hex16(s: &str) -> Result<u16, String> {
    u16::from_str_radix(s.trim(), 16).map_err(|_| format!("bad hex {s:?}"))
}

impl FromStr for DeidPolicy {
    type Err = DeidError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut p = DeidPolicy::default();
        for (n, raw) in text.lines().enumerate() {
            let err = |msg: String| DeidError::PolicyParse { line: n + 1, msg };
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "default_standard" => p.default_standard = value.parse().map_err(err)?,
                "default_private" => p.default_private = value.parse().map_err(err)?,
                "private_keep" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    let [g, creator, off] = parts[..] else {
                        return Err(err("private_keep = GGGG,CREATOR,XX".into()));
                    };
                    let group = parse_hex16(g).map_err(err)?;
                    if group % 2 == 0 {
                        return Err(err(format!("group {g} is not private")));
                    }
                    let offset = parse_hex16(off).map_err(err)?;
                    let offset = u8::try_from(offset).map_err(|_| err("offset > FF".into()))?;
                    p.private_keep_list.insert(PrivateKey {
                        group,
                        creator: creator.to_string(),
                        offset,
                    });
                }
                _ if key.starts_with("vr:") => {
                    let code = key[3..].trim().as_bytes();
                    let vr = match code {
                        [a, b] => Vr::from_code([*a, *b]),
                        _ => return Err(err(format!("bad VR in {key:?}"))),
                    };
                    let action: PolicyAction = value.parse().map_err(err)?;
                    if !action.allowed_for(vr) {
                        return Err(err(format!("{action} is not valid for VR {vr}")));
                    }
                    p.vr_rules.insert(vr.code(), action);
                }
                _ => {
                    let action: PolicyAction = value.parse().map_err(err)?;
                    match key.split_once(")-(") {
                        Some((lo, hi)) => {
                            let lo: Tag = format!("{lo})").parse().map_err(|e| err(format!("{e}")))?;
                            let hi: Tag = format!("({hi}").parse().map_err(|e| err(format!("{e}")))?;
                            if lo > hi {
                                return Err(err("empty tag range".into()));
                            }
                            p.ranges.push((lo, hi, action));
                        }
                        None => {
                            let tag: Tag = key.parse().map_err(|e| err(format!("{e}")))?;
                            p.rules.insert(tag, action);
                        }
                    }
                }
            }
        }
        Ok(p)
    }
}
