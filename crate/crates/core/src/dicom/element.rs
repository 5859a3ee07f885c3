use super::{Dataset, DicomError, Tag, ValueKind, Vr};

/// The decoded value of a data element.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Empty,
    /// Character data, trailing padding stripped. Multi-valued text stays
    /// backslash-joined in one string.
    Text(String),
    /// Binary integers (US, SS, UL, SL) and attribute tags (AT, packed as
    /// `group << 16 | element`).
    Ints(Vec<i64>),
    /// Binary floats (FL, FD).
    Decimals(Vec<f64>),
    /// Opaque bytes (OB, OW, UN), always even length.
    Bytes(Vec<u8>),
    Sequence(Vec<Dataset>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataElement {
    tag: Tag,
    vr: Vr,
    value: Value,
}

fn normalize(vr: Vr, value: Value) -> Result<Value, String> {
    let kind = vr.value_kind();
    Ok(match value {
        Value::Sequence(items) if kind == ValueKind::Sequence => Value::Sequence(items),
        Value::Sequence(_) => return Err(format!("{vr} cannot hold a sequence")),
        _ if kind == ValueKind::Sequence => return Err("SQ must hold a sequence".into()),
        Value::Empty => Value::Empty,
        Value::Text(s) if kind == ValueKind::Text => {
            let trimmed = s.trim_end_matches([' ', '\0']);
            if trimmed.is_empty() {
                Value::Empty
            } else {
                Value::Text(trimmed.to_string())
            }
        }
        Value::Ints(v) if kind == ValueKind::Integer => {
            if v.is_empty() {
                Value::Empty
            } else {
                Value::Ints(v)
            }
        }
        Value::Decimals(v) if kind == ValueKind::Decimal => {
            if v.is_empty() {
                Value::Empty
            } else {
                Value::Decimals(v)
            }
        }
        Value::Bytes(mut b) if kind == ValueKind::Bytes => {
            if b.is_empty() {
                Value::Empty
            } else {
                if b.len() % 2 == 1 {
                    b.push(0);
                }
                Value::Bytes(b)
            }
        }
        other => return Err(format!("{vr} cannot hold {other:?}")),
    })
}

impl DataElement {
    pub fn new(tag: Tag, vr: Vr, value: Value) -> Result<Self, DicomError> {
        let value =
            normalize(vr, value).map_err(|reason| DicomError::ValueMismatch { tag, reason })?;
        Ok(DataElement { tag, vr, value })
    }

    /// Text element; panics if `vr` is not a character VR.
    pub fn text(tag: Tag, vr: Vr, s: impl Into<String>) -> Self {
        Self::new(tag, vr, Value::Text(s.into())).expect("character VR")
    }

    pub fn ints(tag: Tag, vr: Vr, v: Vec<i64>) -> Self {
        Self::new(tag, vr, Value::Ints(v)).expect("integer VR")
    }

    pub fn decimals(tag: Tag, vr: Vr, v: Vec<f64>) -> Self {
        Self::new(tag, vr, Value::Decimals(v)).expect("float VR")
    }

    pub fn bytes(tag: Tag, vr: Vr, b: Vec<u8>) -> Self {
        Self::new(tag, vr, Value::Bytes(b)).expect("byte VR")
    }

    pub fn sequence(tag: Tag, items: Vec<Dataset>) -> Self {
        DataElement {
            tag,
            vr: Vr::SQ,
            value: Value::Sequence(items),
        }
    }

    pub fn empty(tag: Tag, vr: Vr) -> Self {
        if vr == Vr::SQ {
            return Self::sequence(tag, Vec::new());
        }
        DataElement {
            tag,
            vr,
            value: Value::Empty,
        }
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn vr(&self) -> Vr {
        self.vr
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn set_value(&mut self, value: Value) -> Result<(), DicomError> {
        self.value = normalize(self.vr, value).map_err(|reason| DicomError::ValueMismatch {
            tag: self.tag,
            reason,
        })?;
        Ok(())
    }

    pub fn items(&self) -> Option<&[Dataset]> {
        match &self.value {
            Value::Sequence(items) => Some(items),
            _ => None,
        }
    }

    pub fn items_mut(&mut self) -> Option<&mut Vec<Dataset>> {
        match &mut self.value {
            Value::Sequence(items) => Some(items),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.value {
            Value::Empty => true,
            Value::Sequence(items) => items.is_empty(),
            _ => false,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.value {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match &self.value {
            Value::Bytes(b) => Some(b),
            _ => None,
        }
    }

    pub fn first_int(&self) -> Option<i64> {
        match &self.value {
            Value::Ints(v) => v.first().copied(),
            Value::Text(s) if self.vr == Vr::IS => s.split('\\').next()?.trim().parse().ok(),
            _ => None,
        }
    }

    /// Printable rendering of the value, as compared by the scorer.
    pub fn to_text(&self) -> String {
        match &self.value {
            Value::Empty | Value::Sequence(_) => String::new(),
            Value::Text(s) => s.clone(),
            Value::Ints(v) if self.vr == Vr::AT => v
                .iter()
                .map(|&x| Tag::from_u32(x as u32).to_string())
                .collect::<Vec<_>>()
                .join("\\"),
            Value::Ints(v) => join(v),
            Value::Decimals(v) => join(v),
            Value::Bytes(b) => String::from_utf8_lossy(b)
                .trim_end_matches([' ', '\0'])
                .to_string(),
        }
    }

    /// Encoded length of the value without padding.
    pub(crate) fn raw_len(&self) -> usize {
        match &self.value {
            Value::Empty | Value::Sequence(_) => 0,
            Value::Text(s) => s.len(),
            Value::Ints(v) => v.len() * self.vr.binary_width(),
            Value::Decimals(v) => v.len() * self.vr.binary_width(),
            Value::Bytes(b) => b.len(),
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\\")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_padding_is_trimmed() {
        let e = DataElement::text(Tag::new(0x0010, 0x0010), Vr::PN, "DOE^JANE ");
        assert_eq!(e.as_str(), Some("DOE^JANE"));
        let e = DataElement::text(Tag::new(0x0020, 0x000D), Vr::UI, "1.2.3\0");
        assert_eq!(e.as_str(), Some("1.2.3"));
        let e = DataElement::text(Tag::new(0x0008, 0x1030), Vr::LO, "  ");
        assert_eq!(e.value(), &Value::Empty);
    }

    #[test]
    fn odd_byte_values_are_padded() {
        let e = DataElement::bytes(Tag::new(0x0009, 0x1001), Vr::OB, vec![1, 2, 3]);
        assert_eq!(e.as_bytes(), Some(&[1u8, 2, 3, 0][..]));
    }

    #[test]
    fn sq_holds_only_sequences() {
        assert!(DataElement::new(Tag::new(0x0040, 0x0275), Vr::SQ, Value::Empty).is_err());
        assert!(DataElement::new(
            Tag::new(0x0010, 0x0010),
            Vr::PN,
            Value::Sequence(Vec::new())
        )
        .is_err());
        assert!(DataElement::new(Tag::new(0x0028, 0x0010), Vr::US, Value::Text("1".into())).is_err());
    }

    #[test]
    fn to_text_renders_each_kind() {
        assert_eq!(
            DataElement::ints(Tag::new(0x0028, 0x0010), Vr::US, vec![64, 32]).to_text(),
            "64\\32"
        );
        assert_eq!(
            DataElement::ints(Tag::new(0x0020, 0x5000), Vr::AT, vec![0x0010_0020]).to_text(),
            "(0010,0020)"
        );
        assert_eq!(
            DataElement::bytes(Tag::new(0x0009, 0x1010), Vr::UN, b"ACME".to_vec()).to_text(),
            "ACME"
        );
    }
}
