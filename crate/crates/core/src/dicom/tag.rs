use std::fmt;
use std::str::FromStr;

use super::DicomError;

/// A DICOM attribute tag, a `(group, element)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub group: u16,
    pub element: u16,
}

impl Tag {
    pub const fn new(group: u16, element: u16) -> Self {
        Tag { group, element }
    }

    /// Odd groups are reserved for vendor-private attributes.
    pub fn is_private(self) -> bool {
        self.group % 2 == 1
    }

    /// Private creator slots live at `(gggg,0010)`..`(gggg,00FF)`.
    pub fn is_private_creator(self) -> bool {
        self.is_private() && (0x0010..=0x00FF).contains(&self.element)
    }

    /// For a private data element `(gggg,xxee)`, the creator slot `(gggg,00xx)`.
    pub fn private_creator_slot(self) -> Option<Tag> {
        if !self.is_private() || self.element < 0x1000 {
            return None;
        }
        Some(Tag::new(self.group, self.element >> 8))
    }

    pub fn is_group_length(self) -> bool {
        self.element == 0x0000
    }

    pub(crate) fn as_u32(self) -> u32 {
        (u32::from(self.group) << 16) | u32::from(self.element)
    }

    pub(crate) fn from_u32(v: u32) -> Tag {
        Tag::new((v >> 16) as u16, (v & 0xFFFF) as u16)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:04X},{:04X})", self.group, self.element)
    }
}

impl FromStr for Tag {
    type Err = DicomError;

    /// Accepts `(GGGG,EEEE)`, `GGGG,EEEE` or `GGGGEEEE`, any hex case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DicomError::BadTag(s.to_string());
        let t = s.trim();
        let t = t.strip_prefix('(').unwrap_or(t);
        let t = t.strip_suffix(')').unwrap_or(t);
        let (g, e) = match t.split_once(',') {
            Some((g, e)) => (g.trim(), e.trim()),
            None if t.len() == 8 => t.split_at(4),
            None => return Err(bad()),
        };
        if g.len() != 4 || e.len() != 4 {
            return Err(bad());
        }
        let group = u16::from_str_radix(g, 16).map_err(|_| bad())?;
        let element = u16::from_str_radix(e, 16).map_err(|_| bad())?;
        Ok(Tag::new(group, element))
    }
}

pub mod tags {
    //! Named tags used throughout the engine, scorer and generator.
    use super::Tag;

    pub const FILE_META_GROUP_LENGTH: Tag = Tag::new(0x0002, 0x0000);
    pub const FILE_META_VERSION: Tag = Tag::new(0x0002, 0x0001);
    pub const MEDIA_STORAGE_SOP_CLASS_UID: Tag = Tag::new(0x0002, 0x0002);
    pub const MEDIA_STORAGE_SOP_INSTANCE_UID: Tag = Tag::new(0x0002, 0x0003);
    pub const TRANSFER_SYNTAX_UID: Tag = Tag::new(0x0002, 0x0010);
    pub const IMPLEMENTATION_CLASS_UID: Tag = Tag::new(0x0002, 0x0012);
    pub const IMPLEMENTATION_VERSION_NAME: Tag = Tag::new(0x0002, 0x0013);

    pub const IMAGE_TYPE: Tag = Tag::new(0x0008, 0x0008);
    pub const SOP_CLASS_UID: Tag = Tag::new(0x0008, 0x0016);
    pub const SOP_INSTANCE_UID: Tag = Tag::new(0x0008, 0x0018);
    pub const STUDY_DATE: Tag = Tag::new(0x0008, 0x0020);
    pub const SERIES_DATE: Tag = Tag::new(0x0008, 0x0021);
    pub const CONTENT_DATE: Tag = Tag::new(0x0008, 0x0023);
    pub const STUDY_TIME: Tag = Tag::new(0x0008, 0x0030);
    pub const ACCESSION_NUMBER: Tag = Tag::new(0x0008, 0x0050);
    pub const MODALITY: Tag = Tag::new(0x0008, 0x0060);
    pub const MANUFACTURER: Tag = Tag::new(0x0008, 0x0070);
    pub const INSTITUTION_NAME: Tag = Tag::new(0x0008, 0x0080);
    pub const REFERRING_PHYSICIAN_NAME: Tag = Tag::new(0x0008, 0x0090);
    pub const STATION_NAME: Tag = Tag::new(0x0008, 0x1010);
    pub const STUDY_DESCRIPTION: Tag = Tag::new(0x0008, 0x1030);
    pub const SERIES_DESCRIPTION: Tag = Tag::new(0x0008, 0x103E);
    pub const OPERATORS_NAME: Tag = Tag::new(0x0008, 0x1070);
    pub const REFERENCED_SOP_CLASS_UID: Tag = Tag::new(0x0008, 0x1150);

    pub const PATIENT_NAME: Tag = Tag::new(0x0010, 0x0010);
    pub const PATIENT_ID: Tag = Tag::new(0x0010, 0x0020);
    pub const PATIENT_BIRTH_DATE: Tag = Tag::new(0x0010, 0x0030);
    pub const PATIENT_SEX: Tag = Tag::new(0x0010, 0x0040);
    pub const OTHER_PATIENT_IDS: Tag = Tag::new(0x0010, 0x1000);
    pub const PATIENT_AGE: Tag = Tag::new(0x0010, 0x1010);
    pub const PATIENT_ADDRESS: Tag = Tag::new(0x0010, 0x1040);
    pub const PATIENT_TELEPHONE_NUMBERS: Tag = Tag::new(0x0010, 0x2154);
    pub const ADDITIONAL_PATIENT_HISTORY: Tag = Tag::new(0x0010, 0x21B0);

    pub const BODY_PART_EXAMINED: Tag = Tag::new(0x0018, 0x0015);
    pub const SLICE_THICKNESS: Tag = Tag::new(0x0018, 0x0050);
    pub const DEVICE_SERIAL_NUMBER: Tag = Tag::new(0x0018, 0x1000);

    pub const STUDY_INSTANCE_UID: Tag = Tag::new(0x0020, 0x000D);
    pub const SERIES_INSTANCE_UID: Tag = Tag::new(0x0020, 0x000E);
    pub const STUDY_ID: Tag = Tag::new(0x0020, 0x0010);
    pub const SERIES_NUMBER: Tag = Tag::new(0x0020, 0x0011);
    pub const ACQUISITION_NUMBER: Tag = Tag::new(0x0020, 0x0012);
    pub const INSTANCE_NUMBER: Tag = Tag::new(0x0020, 0x0013);
    pub const FRAME_OF_REFERENCE_UID: Tag = Tag::new(0x0020, 0x0052);

    pub const SAMPLES_PER_PIXEL: Tag = Tag::new(0x0028, 0x0002);
    pub const PHOTOMETRIC_INTERPRETATION: Tag = Tag::new(0x0028, 0x0004);
    pub const NUMBER_OF_FRAMES: Tag = Tag::new(0x0028, 0x0008);
    pub const ROWS: Tag = Tag::new(0x0028, 0x0010);
    pub const COLUMNS: Tag = Tag::new(0x0028, 0x0011);
    pub const BITS_ALLOCATED: Tag = Tag::new(0x0028, 0x0100);
    pub const BITS_STORED: Tag = Tag::new(0x0028, 0x0101);
    pub const HIGH_BIT: Tag = Tag::new(0x0028, 0x0102);
    pub const PIXEL_REPRESENTATION: Tag = Tag::new(0x0028, 0x0103);
    pub const BURNED_IN_ANNOTATION: Tag = Tag::new(0x0028, 0x0301);

    pub const REQUESTED_PROCEDURE_DESCRIPTION: Tag = Tag::new(0x0032, 0x1060);
    pub const REQUEST_ATTRIBUTES_SEQUENCE: Tag = Tag::new(0x0040, 0x0275);
    pub const REQUESTED_PROCEDURE_ID: Tag = Tag::new(0x0040, 0x1001);

    pub const PIXEL_DATA: Tag = Tag::new(0x7FE0, 0x0010);

    pub const ITEM: Tag = Tag::new(0xFFFE, 0xE000);
    pub const ITEM_DELIMITATION: Tag = Tag::new(0xFFFE, 0xE00D);
    pub const SEQUENCE_DELIMITATION: Tag = Tag::new(0xFFFE, 0xE0DD);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_is_uppercase_zero_padded() {
        assert_eq!(Tag::new(0x0010, 0x0010).to_string(), "(0010,0010)");
        assert_eq!(Tag::new(0x7fe0, 0x10).to_string(), "(7FE0,0010)");
        assert_eq!(Tag::new(0x0010, 0x21b0).to_string(), "(0010,21B0)");
    }

    #[test]
    fn parses_all_accepted_forms() {
        let t = Tag::new(0x0008, 0x103E);
        assert_eq!("(0008,103E)".parse::<Tag>().unwrap(), t);
        assert_eq!("(0008,103e)".parse::<Tag>().unwrap(), t);
        assert_eq!("0008,103E".parse::<Tag>().unwrap(), t);
        assert_eq!("0008103E".parse::<Tag>().unwrap(), t);
        assert!("(008,103E)".parse::<Tag>().is_err());
        assert!("(0008,10G3)".parse::<Tag>().is_err());
        assert!("".parse::<Tag>().is_err());
    }

    #[test]
    fn privateness_matches_group_parity_for_every_group() {
        for g in 0..=u16::MAX {
            assert_eq!(Tag::new(g, 0x0010).is_private(), g % 2 == 1);
        }
    }

    #[test]
    fn private_creator_slot() {
        assert_eq!(
            Tag::new(0x0009, 0x1020).private_creator_slot(),
            Some(Tag::new(0x0009, 0x0010))
        );
        assert_eq!(
            Tag::new(0x0019, 0x11FF).private_creator_slot(),
            Some(Tag::new(0x0019, 0x0011))
        );
        assert_eq!(Tag::new(0x0009, 0x0010).private_creator_slot(), None);
        assert_eq!(Tag::new(0x0010, 0x1010).private_creator_slot(), None);
        assert!(Tag::new(0x0009, 0x0010).is_private_creator());
    }
}
