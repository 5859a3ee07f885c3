//! Bounded data dictionary: VR and display name for the attributes the
//! policy, answer key and generator touch. Used for implicit-VR decoding and
//! for `tag_name` columns.

use super::{Tag, Vr};

struct Entry {
    tag: u32,
    vr: Vr,
    name: &'static str,
}

macro_rules! dict {
    ($(($g:literal, $e:literal, $vr:ident, $name:literal)),* $(,)?) => {
        &[$(Entry { tag: ($g << 16) | $e, vr: Vr::$vr, name: $name }),*]
    };
}

// Sorted by tag for binary search.
static ENTRIES: &[Entry] = dict![
    (0x0002, 0x0001, OB, "File Meta Information Version"),
    (0x0002, 0x0002, UI, "Media Storage SOP Class UID"),
    (0x0002, 0x0003, UI, "Media Storage SOP Instance UID"),
    (0x0002, 0x0010, UI, "Transfer Syntax UID"),
    (0x0002, 0x0012, UI, "Implementation Class UID"),
    (0x0002, 0x0013, SH, "Implementation Version Name"),
    (0x0002, 0x0016, AE, "Source Application Entity Title"),
    (0x0008, 0x0005, CS, "Specific Character Set"),
    (0x0008, 0x0008, CS, "Image Type"),
    (0x0008, 0x0012, DA, "Instance Creation Date"),
    (0x0008, 0x0013, TM, "Instance Creation Time"),
    (0x0008, 0x0014, UI, "Instance Creator UID"),
    (0x0008, 0x0016, UI, "SOP Class UID"),
    (0x0008, 0x0018, UI, "SOP Instance UID"),
    (0x0008, 0x0020, DA, "Study Date"),
    (0x0008, 0x0021, DA, "Series Date"),
    (0x0008, 0x0022, DA, "Acquisition Date"),
    (0x0008, 0x0023, DA, "Content Date"),
    (0x0008, 0x002A, DT, "Acquisition DateTime"),
    (0x0008, 0x0030, TM, "Study Time"),
    (0x0008, 0x0031, TM, "Series Time"),
    (0x0008, 0x0032, TM, "Acquisition Time"),
    (0x0008, 0x0033, TM, "Content Time"),
    (0x0008, 0x0050, SH, "Accession Number"),
    (0x0008, 0x0060, CS, "Modality"),
    (0x0008, 0x0064, CS, "Conversion Type"),
    (0x0008, 0x0070, LO, "Manufacturer"),
    (0x0008, 0x0080, LO, "Institution Name"),
    (0x0008, 0x0081, ST, "Institution Address"),
    (0x0008, 0x0090, PN, "Referring Physician's Name"),
    (0x0008, 0x0092, ST, "Referring Physician's Address"),
    (0x0008, 0x0094, SH, "Referring Physician's Telephone Numbers"),
    (0x0008, 0x1010, SH, "Station Name"),
    (0x0008, 0x1030, LO, "Study Description"),
    (0x0008, 0x103E, LO, "Series Description"),
    (0x0008, 0x1040, LO, "Institutional Department Name"),
    (0x0008, 0x1048, PN, "Physician(s) of Record"),
    (0x0008, 0x1050, PN, "Performing Physician's Name"),
    (0x0008, 0x1060, PN, "Name of Physician(s) Reading Study"),
    (0x0008, 0x1070, PN, "Operators' Name"),
    (0x0008, 0x1080, LO, "Admitting Diagnoses Description"),
    (0x0008, 0x1090, LO, "Manufacturer's Model Name"),
    (0x0008, 0x1110, SQ, "Referenced Study Sequence"),
    (0x0008, 0x1111, SQ, "Referenced Performed Procedure Step Sequence"),
    (0x0008, 0x1140, SQ, "Referenced Image Sequence"),
    (0x0008, 0x1150, UI, "Referenced SOP Class UID"),
    (0x0008, 0x1155, UI, "Referenced SOP Instance UID"),
    (0x0010, 0x0010, PN, "Patient's Name"),
    (0x0010, 0x0020, LO, "Patient ID"),
    (0x0010, 0x0021, LO, "Issuer of Patient ID"),
    (0x0010, 0x0030, DA, "Patient's Birth Date"),
    (0x0010, 0x0032, TM, "Patient's Birth Time"),
    (0x0010, 0x0040, CS, "Patient's Sex"),
    (0x0010, 0x1000, LO, "Other Patient IDs"),
    (0x0010, 0x1001, PN, "Other Patient Names"),
    (0x0010, 0x1010, AS, "Patient's Age"),
    (0x0010, 0x1020, DS, "Patient's Size"),
    (0x0010, 0x1030, DS, "Patient's Weight"),
    (0x0010, 0x1040, LO, "Patient's Address"),
    (0x0010, 0x1060, PN, "Patient's Mother's Birth Name"),
    (0x0010, 0x2154, SH, "Patient's Telephone Numbers"),
    (0x0010, 0x2160, SH, "Ethnic Group"),
    (0x0010, 0x2180, SH, "Occupation"),
    (0x0010, 0x21B0, LT, "Additional Patient History"),
    (0x0010, 0x4000, LT, "Patient Comments"),
    (0x0018, 0x0015, CS, "Body Part Examined"),
    (0x0018, 0x0050, DS, "Slice Thickness"),
    (0x0018, 0x1000, LO, "Device Serial Number"),
    (0x0018, 0x1020, LO, "Software Versions"),
    (0x0018, 0x1030, LO, "Protocol Name"),
    (0x0020, 0x000D, UI, "Study Instance UID"),
    (0x0020, 0x000E, UI, "Series Instance UID"),
    (0x0020, 0x0010, SH, "Study ID"),
    (0x0020, 0x0011, IS, "Series Number"),
    (0x0020, 0x0012, IS, "Acquisition Number"),
    (0x0020, 0x0013, IS, "Instance Number"),
    (0x0020, 0x0020, CS, "Patient Orientation"),
    (0x0020, 0x0052, UI, "Frame of Reference UID"),
    (0x0020, 0x4000, LT, "Image Comments"),
    (0x0028, 0x0002, US, "Samples per Pixel"),
    (0x0028, 0x0004, CS, "Photometric Interpretation"),
    (0x0028, 0x0008, IS, "Number of Frames"),
    (0x0028, 0x0010, US, "Rows"),
    (0x0028, 0x0011, US, "Columns"),
    (0x0028, 0x0030, DS, "Pixel Spacing"),
    (0x0028, 0x0100, US, "Bits Allocated"),
    (0x0028, 0x0101, US, "Bits Stored"),
    (0x0028, 0x0102, US, "High Bit"),
    (0x0028, 0x0103, US, "Pixel Representation"),
    (0x0028, 0x0301, CS, "Burned In Annotation"),
    (0x0032, 0x1032, PN, "Requesting Physician"),
    (0x0032, 0x1060, LO, "Requested Procedure Description"),
    (0x0040, 0x0244, DA, "Performed Procedure Step Start Date"),
    (0x0040, 0x0254, LO, "Performed Procedure Step Description"),
    (0x0040, 0x0275, SQ, "Request Attributes Sequence"),
    (0x0040, 0x1001, SH, "Requested Procedure ID"),
    (0x0040, 0xA730, SQ, "Content Sequence"),
    (0x7FE0, 0x0010, OW, "Pixel Data"),
];

fn find(tag: Tag) -> Option<&'static Entry> {
    let key = tag.as_u32();
    ENTRIES
        .binary_search_by_key(&key, |e| e.tag)
        .ok()
        .map(|i| &ENTRIES[i])
}

/// VR used when decoding `tag` from an implicit-VR stream.
pub fn lookup_vr(tag: Tag) -> Option<Vr> {
    if tag.is_group_length() {
        return Some(Vr::UL);
    }
    if tag.is_private_creator() {
        return Some(Vr::LO);
    }
    find(tag).map(|e| e.vr)
}

pub fn tag_name(tag: Tag) -> &'static str {
    if tag.is_group_length() {
        return "Group Length";
    }
    if tag.is_private_creator() {
        return "Private Creator";
    }
    if tag.is_private() {
        return "Private Tag";
    }
    find(tag).map_or("Unknown Tag", |e| e.name)
}
