//! Minimal DICOM Part-10 reader and writer.
//!
//! Supports explicit and implicit VR little endian only. Sequences of either
//! defined or undefined length are read; sequences are always written with
//! undefined length and explicit item delimiters.

mod dataset;
pub mod dictionary;
mod element;
pub mod pixels;
mod read;
mod tag;
mod vr;
mod write;

use std::path::Path;

use thiserror::Error;

pub use dataset::{Dataset, ElementPath};
pub use element::{DataElement, Value};
pub use tag::{tags, Tag};
pub use pixels::PixelGeometry;
pub use vr::{ValueKind, Vr};

pub const EXPLICIT_VR_LITTLE_ENDIAN: &str = "1.2.840.10008.1.2.1";
pub const IMPLICIT_VR_LITTLE_ENDIAN: &str = "1.2.840.10008.1.2";
pub const IMPLEMENTATION_CLASS_UID: &str = "2.25.302195436271488411364118829410196356411";
pub const IMPLEMENTATION_VERSION_NAME: &str = "MIDIB_DEID_01";

#[derive(Debug, Error)]
pub enum DicomError {
    #[error("stream truncated at offset {offset}")]
    TruncatedStream { offset: usize },
    #[error("missing DICM marker after preamble")]
    BadMagic,
    #[error("unsupported transfer syntax: {0}")]
    UnsupportedTransferSyntax(String),
    #[error("file meta has no transfer syntax UID")]
    MissingTransferSyntax,
    #[error("value of {tag} is {len} bytes, too long for its length field")]
    ValueTooLong { tag: Tag, len: usize },
    #[error("value does not fit VR of {tag}: {reason}")]
    ValueMismatch { tag: Tag, reason: String },
    #[error("malformed stream: {0}")]
    Malformed(String),
    #[error("bad tag text {0:?}")]
    BadTag(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferSyntax {
    ExplicitVrLittleEndian,
    ImplicitVrLittleEndian,
}

impl TransferSyntax {
    pub fn uid(self) -> &'static str {
        match self {
            TransferSyntax::ExplicitVrLittleEndian => EXPLICIT_VR_LITTLE_ENDIAN,
            TransferSyntax::ImplicitVrLittleEndian => IMPLICIT_VR_LITTLE_ENDIAN,
        }
    }

    pub fn from_uid(uid: &str) -> Result<Self, DicomError> {
        match uid.trim_end_matches(['\0', ' ']) {
            EXPLICIT_VR_LITTLE_ENDIAN => Ok(TransferSyntax::ExplicitVrLittleEndian),
            IMPLICIT_VR_LITTLE_ENDIAN => Ok(TransferSyntax::ImplicitVrLittleEndian),
            other => Err(DicomError::UnsupportedTransferSyntax(other.to_string())),
        }
    }

    pub fn is_explicit(self) -> bool {
        self == TransferSyntax::ExplicitVrLittleEndian
    }
}

/// A Part-10 file: preamble, group-0002 file meta and the main dataset.
///
/// The file meta group length `(0002,0000)` is not stored; it is recomputed
/// on every write.
#[derive(Debug, Clone, PartialEq)]
pub struct DicomFile {
    pub preamble: [u8; 128],
    pub meta: Dataset,
    pub dataset: Dataset,
    transfer_syntax: TransferSyntax,
}

impl DicomFile {
    /// Builds a file with standard meta derived from the dataset's SOP
    /// Class/Instance UIDs.
    pub fn new(transfer_syntax: TransferSyntax, dataset: Dataset) -> Self {
        let mut meta = Dataset::new();
        meta.insert(DataElement::bytes(tags::FILE_META_VERSION, Vr::OB, vec![0, 1]));
        if let Some(class) = dataset.text(tags::SOP_CLASS_UID) {
            meta.insert(DataElement::text(tags::MEDIA_STORAGE_SOP_CLASS_UID, Vr::UI, class));
        }
        if let Some(inst) = dataset.text(tags::SOP_INSTANCE_UID) {
            meta.insert(DataElement::text(tags::MEDIA_STORAGE_SOP_INSTANCE_UID, Vr::UI, inst));
        }
        meta.insert(DataElement::text(
            tags::TRANSFER_SYNTAX_UID,
            Vr::UI,
            transfer_syntax.uid(),
        ));
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
        DicomFile {
            preamble: [0; 128],
            meta,
            dataset,
            transfer_syntax,
        }
    }

    pub fn from_parts(meta: Dataset, dataset: Dataset) -> Result<Self, DicomError> {
        let ts = meta
            .text(tags::TRANSFER_SYNTAX_UID)
            .ok_or(DicomError::MissingTransferSyntax)?;
        let transfer_syntax = TransferSyntax::from_uid(ts)?;
        Ok(DicomFile {
            preamble: [0; 128],
            meta,
            dataset,
            transfer_syntax,
        })
    }

    pub fn transfer_syntax(&self) -> TransferSyntax {
        self.transfer_syntax
    }

    pub fn set_transfer_syntax(&mut self, ts: TransferSyntax) {
        self.transfer_syntax = ts;
        self.meta
            .insert(DataElement::text(tags::TRANSFER_SYNTAX_UID, Vr::UI, ts.uid()));
    }

    pub fn sop_instance_uid(&self) -> Option<&str> {
        self.dataset.text(tags::SOP_INSTANCE_UID)
    }
}

/// Parses a Part-10 stream that starts with the 128-byte preamble and `DICM`.
pub fn parse_file(bytes: &[u8]) -> Result<DicomFile, DicomError> {
    parse_file_with(bytes, false)
}

/// As [`parse_file`]; with `lenient` set, a stream that starts directly
/// with group-0002 elements is also accepted.
pub fn parse_file_with(bytes: &[u8], lenient: bool) -> Result<DicomFile, DicomError> {
    let has_magic = bytes.len() >= 132 && &bytes[128..132] == b"DICM";
    let mut preamble = [0u8; 128];
    let start = if has_magic {
        preamble.copy_from_slice(&bytes[..128]);
        132
    } else if lenient && bytes.len() >= 2 && bytes[..2] == [0x02, 0x00] {
        0
    } else if bytes.len() < 132 && !lenient {
        return Err(DicomError::TruncatedStream {
            offset: bytes.len(),
        });
    } else {
        return Err(DicomError::BadMagic);
    };

    let mut reader = read::Reader::new(bytes, start);
    let mut meta = reader.read_group(0x0002)?;
    meta.remove(tags::FILE_META_GROUP_LENGTH);
    let ts = meta
        .text(tags::TRANSFER_SYNTAX_UID)
        .ok_or(DicomError::MissingTransferSyntax)?;
    let transfer_syntax = TransferSyntax::from_uid(ts)?;
    let dataset = reader.read_dataset(transfer_syntax.is_explicit(), None)?;
    debug_assert!(reader.at_end(), "stopped at {}", reader.pos());
    Ok(DicomFile {
        preamble,
        meta,
        dataset,
        transfer_syntax,
    })
}

/// Deterministic Part-10 encoding.
pub fn serialize(file: &DicomFile) -> Result<Vec<u8>, DicomError> {
    let mut meta_bytes = Vec::new();
    let mut meta = file.meta.clone();
    meta.remove(tags::FILE_META_GROUP_LENGTH);
    write::write_dataset(&mut meta_bytes, &meta, true)?;

    let mut out = Vec::with_capacity(132 + 12 + meta_bytes.len() + 1024);
    out.extend_from_slice(&file.preamble);
    out.extend_from_slice(b"DICM");
    let group_length = DataElement::ints(
        tags::FILE_META_GROUP_LENGTH,
        Vr::UL,
        vec![meta_bytes.len() as i64],
    );
    write::write_dataset(&mut out, &std::iter::once(group_length).collect(), true)?;
    out.extend_from_slice(&meta_bytes);
    write::write_dataset(
        &mut out,
        &file.dataset,
        file.transfer_syntax.is_explicit(),
    )?;
    Ok(out)
}

pub fn read_file(path: impl AsRef<Path>, lenient: bool) -> Result<DicomFile, DicomError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| DicomError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_file_with(&bytes, lenient)
}

pub fn write_file(path: impl AsRef<Path>, file: &DicomFile) -> Result<(), DicomError> {
    let path = path.as_ref();
    let io = |source| DicomError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, serialize(file)?).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(ts: TransferSyntax, ds: Dataset) -> DicomFile {
        DicomFile::new(ts, ds)
    }

    #[test]
    fn single_patient_name_file() {
        let ds: Dataset = [DataElement::text(tags::PATIENT_NAME, Vr::PN, "DOE^JANE")]
            .into_iter()
            .collect();
        let bytes = serialize(&minimal(TransferSyntax::ExplicitVrLittleEndian, ds)).unwrap();
        let f = parse_file(&bytes).unwrap();
        assert_eq!(f.dataset.len(), 1);
        let e = f.dataset.iter().next().unwrap();
        assert_eq!(e.tag().to_string(), "(0010,0010)");
        assert_eq!(e.as_str(), Some("DOE^JANE"));
    }

    #[test]
    fn long_text_preserved_verbatim() {
        for ts in [
            TransferSyntax::ExplicitVrLittleEndian,
            TransferSyntax::ImplicitVrLittleEndian,
        ] {
            let ds: Dataset = [DataElement::text(
                tags::ADDITIONAL_PATIENT_HISTORY,
                Vr::LT,
                "Patient fell in 2019",
            )]
            .into_iter()
            .collect();
            let f = parse_file(&serialize(&minimal(ts, ds)).unwrap()).unwrap();
            let e = f.dataset.get(tags::ADDITIONAL_PATIENT_HISTORY).unwrap();
            assert_eq!(e.vr(), Vr::LT);
            assert_eq!(e.as_str(), Some("Patient fell in 2019"));
        }
    }

    #[test]
    fn empty_dataset_round_trips() {
        let f = minimal(TransferSyntax::ExplicitVrLittleEndian, Dataset::new());
        let bytes = serialize(&f).unwrap();
        let back = parse_file(&bytes).unwrap();
        assert!(back.dataset.is_empty());
        assert_eq!(back, f);
        assert_eq!(serialize(&back).unwrap(), bytes);
    }

    #[test]
    fn output_is_sorted_by_tag() {
        let mut ds = Dataset::new();
        ds.insert(DataElement::text(tags::PATIENT_BIRTH_DATE, Vr::DA, "19800101"));
        ds.insert(DataElement::text(tags::IMAGE_TYPE, Vr::CS, "ORIGINAL"));
        let f = minimal(TransferSyntax::ExplicitVrLittleEndian, ds);
        let bytes = serialize(&f).unwrap();
        let image_type = bytes.windows(4).position(|w| w == [0x08, 0, 0x08, 0]).unwrap();
        let birth = bytes.windows(4).position(|w| w == [0x10, 0, 0x30, 0]).unwrap();
        assert!(image_type < birth);
    }

    #[test]
    fn strict_mode_requires_magic() {
        let f = minimal(TransferSyntax::ExplicitVrLittleEndian, Dataset::new());
        let bytes = serialize(&f).unwrap();
        let bare = &bytes[132..];
        assert!(matches!(parse_file(bare), Err(DicomError::BadMagic) | Err(DicomError::TruncatedStream { .. })));
        let mut no_magic = bytes.clone();
        no_magic[128..132].copy_from_slice(b"XXXX");
        assert!(matches!(parse_file(&no_magic), Err(DicomError::BadMagic)));
        let lenient = parse_file_with(bare, true).unwrap();
        assert_eq!(lenient.meta, f.meta);
    }

    #[test]
    fn truncation_is_reported() {
        let ds: Dataset = [DataElement::text(tags::STUDY_DESCRIPTION, Vr::LO, "CHEST PA")]
            .into_iter()
            .collect();
        let bytes = serialize(&minimal(TransferSyntax::ExplicitVrLittleEndian, ds)).unwrap();
        let cut = &bytes[..bytes.len() - 3];
        assert!(matches!(
            parse_file(cut),
            Err(DicomError::TruncatedStream { .. })
        ));
    }

    #[test]
    fn compressed_syntax_rejected() {
        let mut f = minimal(TransferSyntax::ExplicitVrLittleEndian, Dataset::new());
        f.meta.insert(DataElement::text(
            tags::TRANSFER_SYNTAX_UID,
            Vr::UI,
            "1.2.840.10008.1.2.4.50",
        ));
        let bytes = serialize(&f).unwrap();
        assert!(matches!(
            parse_file(&bytes),
            Err(DicomError::UnsupportedTransferSyntax(_))
        ));
    }

    #[test]
    fn short_length_overflow_is_an_error() {
        let ds: Dataset = [DataElement::text(
            tags::STUDY_DESCRIPTION,
            Vr::LO,
            "X".repeat(70_000),
        )]
        .into_iter()
        .collect();
        let f = minimal(TransferSyntax::ExplicitVrLittleEndian, ds.clone());
        assert!(matches!(serialize(&f), Err(DicomError::ValueTooLong { .. })));
        // implicit VR has a 32-bit length for every element
        let f = minimal(TransferSyntax::ImplicitVrLittleEndian, ds);
        assert!(serialize(&f).is_ok());
    }

    #[test]
    fn defined_length_sequences_are_read() {
        // (0040,0275) SQ, defined length, one defined-length item holding (0040,1001) SH "RP1 "
        let mut body = Vec::new();
        let inner: &[u8] = &[0x40, 0, 0x01, 0x10, b'S', b'H', 4, 0, b'R', b'P', b'1', b' '];
        let mut item = vec![0xFE, 0xFF, 0x00, 0xE0];
        item.extend_from_slice(&(inner.len() as u32).to_le_bytes());
        item.extend_from_slice(inner);
        body.extend_from_slice(&[0x40, 0, 0x75, 0x02, b'S', b'Q', 0, 0]);
        body.extend_from_slice(&(item.len() as u32).to_le_bytes());
        body.extend_from_slice(&item);
        let mut bytes =
            serialize(&minimal(TransferSyntax::ExplicitVrLittleEndian, Dataset::new())).unwrap();
        bytes.extend_from_slice(&body);
        let f = parse_file(&bytes).unwrap();
        let items = f
            .dataset
            .get(tags::REQUEST_ATTRIBUTES_SEQUENCE)
            .unwrap()
            .items()
            .unwrap();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].text(tags::REQUESTED_PROCEDURE_ID), Some("RP1"));
    }
}
