use super::{dictionary, tags, DataElement, Dataset, DicomError, Tag, Value, ValueKind, Vr};

const UNDEFINED: u32 = 0xFFFF_FFFF;

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

enum Next {
    Element(DataElement),
    ItemEnd,
    SequenceEnd,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8], pos: usize) -> Self {
        Reader { buf, pos }
    }

    pub(crate) fn pos(&self) -> usize {
        self.pos
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.buf.len()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DicomError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(DicomError::TruncatedStream { offset: self.pos })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, DicomError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, DicomError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn tag(&mut self) -> Result<Tag, DicomError> {
        let group = self.u16()?;
        let element = self.u16()?;
        Ok(Tag::new(group, element))
    }

    pub(crate) fn peek_group(&self) -> Option<u16> {
        let b = self.buf.get(self.pos..self.pos + 2)?;
        Some(u16::from_le_bytes([b[0], b[1]]))
    }

    /// Reads elements until the stream ends or the next element leaves `group`.
    pub(crate) fn read_group(&mut self, group: u16) -> Result<Dataset, DicomError> {
        let mut ds = Dataset::new();
        while self.peek_group() == Some(group) {
            match self.next(true)? {
                Next::Element(e) => {
                    ds.insert(e);
                }
                _ => return Err(DicomError::Malformed("delimiter in file meta".into())),
            }
        }
        Ok(ds)
    }

    /// Reads a dataset up to `end` (absolute offset) or to the end of input.
    pub(crate) fn read_dataset(
        &mut self,
        explicit: bool,
        end: Option<usize>,
    ) -> Result<Dataset, DicomError> {
        let limit = end.unwrap_or(self.buf.len());
        if limit > self.buf.len() {
            return Err(DicomError::TruncatedStream { offset: self.buf.len() });
        }
        let mut ds = Dataset::new();
        while self.pos < limit {
            match self.next(explicit)? {
                Next::Element(e) => {
                    ds.insert(e);
                }
                Next::ItemEnd | Next::SequenceEnd => {
                    return Err(DicomError::Malformed(format!(
                        "unexpected delimiter at offset {}",
                        self.pos - 8
                    )))
                }
            }
        }
        Ok(ds)
    }

    fn read_item_until_delimiter(&mut self, explicit: bool) -> Result<Dataset, DicomError> {
        let mut ds = Dataset::new();
        loop {
            match self.next(explicit)? {
                Next::Element(e) => {
                    ds.insert(e);
                }
                Next::ItemEnd => return Ok(ds),
                Next::SequenceEnd => {
                    return Err(DicomError::Malformed("sequence ended inside item".into()))
                }
            }
        }
    }

    fn next(&mut self, explicit: bool) -> Result<Next, DicomError> {
        let tag = self.tag()?;
        if tag == tags::ITEM_DELIMITATION {
            self.u32()?;
            return Ok(Next::ItemEnd);
        }
        if tag == tags::SEQUENCE_DELIMITATION {
            self.u32()?;
            return Ok(Next::SequenceEnd);
        }
        if tag == tags::ITEM {
            return Err(DicomError::Malformed(format!(
                "item tag outside sequence at offset {}",
                self.pos - 4
            )));
        }
        let (vr, len) = if explicit {
            let code = self.take(2)?;
            let vr = Vr::from_code([code[0], code[1]]);
            if vr.has_long_length() {
                self.take(2)?;
                (vr, self.u32()?)
            } else {
                (vr, u32::from(self.u16()?))
            }
        } else {
            (dictionary::lookup_vr(tag).unwrap_or(Vr::UN), self.u32()?)
        };

        if vr == Vr::SQ || (len == UNDEFINED && vr == Vr::UN) {
            // UN of undefined length is an implicit-VR encoded sequence.
            let nested_explicit = explicit && vr == Vr::SQ;
            let items = self.read_items(nested_explicit, len)?;
            return Ok(Next::Element(DataElement::sequence(tag, items)));
        }
        if len == UNDEFINED {
            return Err(if tag == tags::PIXEL_DATA {
                DicomError::UnsupportedTransferSyntax("encapsulated pixel data".into())
            } else {
                DicomError::Malformed(format!("undefined length on {tag} {vr}"))
            });
        }
        let raw = self.take(len as usize)?;
        let value = decode(vr, raw);
        DataElement::new(tag, vr, value).map(Next::Element)
    }

    fn read_items(&mut self, explicit: bool, len: u32) -> Result<Vec<Dataset>, DicomError> {
        let end = if len == UNDEFINED {
            None
        } else {
            Some(self.pos + len as usize)
        };
        let mut items = Vec::new();
        loop {
            if let Some(end) = end {
                if self.pos >= end {
                    break;
                }
            }
            let tag = self.tag()?;
            let item_len = self.u32()?;
            if tag == tags::SEQUENCE_DELIMITATION {
                if end.is_some() {
                    return Err(DicomError::Malformed("delimiter in defined-length sequence".into()));
                }
                break;
            }
            if tag != tags::ITEM {
                return Err(DicomError::Malformed(format!(
                    "expected item tag, found {tag} at offset {}",
                    self.pos - 8
                )));
            }
            let item = if item_len == UNDEFINED {
                self.read_item_until_delimiter(explicit)?
            } else {
                self.read_dataset(explicit, Some(self.pos + item_len as usize))?
            };
            items.push(item);
        }
        Ok(items)
    }
}

fn decode(vr: Vr, raw: &[u8]) -> Value {
    if raw.is_empty() {
        return Value::Empty;
    }
    match vr.value_kind() {
        ValueKind::Text => Value::Text(String::from_utf8_lossy(raw).into_owned()),
        ValueKind::Integer => {
            let w = vr.binary_width();
            Value::Ints(
                raw.chunks_exact(w)
                    .map(|c| match vr {
                        Vr::US => i64::from(u16::from_le_bytes([c[0], c[1]])),
                        Vr::SS => i64::from(i16::from_le_bytes([c[0], c[1]])),
                        Vr::UL => i64::from(u32::from_le_bytes([c[0], c[1], c[2], c[3]])),
                        Vr::SL => i64::from(i32::from_le_bytes([c[0], c[1], c[2], c[3]])),
                        // AT: group then element, each little endian
                        _ => {
                            let g = u16::from_le_bytes([c[0], c[1]]);
                            let e = u16::from_le_bytes([c[2], c[3]]);
                            i64::from(Tag::new(g, e).as_u32())
                        }
                    })
                    .collect(),
            )
        }
        ValueKind::Decimal => Value::Decimals(match vr {
            Vr::FL => raw
                .chunks_exact(4)
                .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
                .collect(),
            _ => raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        }),
        ValueKind::Bytes | ValueKind::Sequence => Value::Bytes(raw.to_vec()),
    }
}
