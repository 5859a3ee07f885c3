use super::{tags, DataElement, Dataset, DicomError, Tag, Value, Vr};

const UNDEFINED: u32 = 0xFFFF_FFFF;

fn put_tag(out: &mut Vec<u8>, tag: Tag) {
    out.extend_from_slice(&tag.group.to_le_bytes());
    out.extend_from_slice(&tag.element.to_le_bytes());
}

pub(crate) fn write_dataset(
    out: &mut Vec<u8>,
    ds: &Dataset,
    explicit: bool,
) -> Result<(), DicomError> {
    for e in ds.iter() {
        write_element(out, e, explicit)?;
    }
    Ok(())
}

fn write_header(out: &mut Vec<u8>, tag: Tag, vr: Vr, len: u32, explicit: bool) {
    put_tag(out, tag);
    if explicit {
        out.extend_from_slice(vr.code().as_bytes());
        if vr.has_long_length() {
            out.extend_from_slice(&[0, 0]);
            out.extend_from_slice(&len.to_le_bytes());
        } else {
            out.extend_from_slice(&(len as u16).to_le_bytes());
        }
    } else {
        out.extend_from_slice(&len.to_le_bytes());
    }
}

fn write_element(out: &mut Vec<u8>, e: &DataElement, explicit: bool) -> Result<(), DicomError> {
    if let Some(items) = e.items() {
        write_header(out, e.tag(), Vr::SQ, UNDEFINED, explicit);
        for item in items {
            put_tag(out, tags::ITEM);
            out.extend_from_slice(&UNDEFINED.to_le_bytes());
            write_dataset(out, item, explicit)?;
            put_tag(out, tags::ITEM_DELIMITATION);
            out.extend_from_slice(&0u32.to_le_bytes());
        }
        put_tag(out, tags::SEQUENCE_DELIMITATION);
        out.extend_from_slice(&0u32.to_le_bytes());
        return Ok(());
    }

    let padded = e.raw_len() + e.raw_len() % 2;
    let limit = if explicit && !e.vr().has_long_length() {
        u16::MAX as usize
    } else {
        (UNDEFINED - 1) as usize
    };
    if padded > limit {
        return Err(DicomError::ValueTooLong {
            tag: e.tag(),
            len: padded,
        });
    }
    write_header(out, e.tag(), e.vr(), padded as u32, explicit);
    let start = out.len();
    encode_value(out, e);
    if (out.len() - start) % 2 == 1 {
        out.push(e.vr().padding());
    }
    Ok(())
}

fn encode_value(out: &mut Vec<u8>, e: &DataElement) {
    let vr = e.vr();
    match e.value() {
        Value::Empty | Value::Sequence(_) => {}
        Value::Text(s) => out.extend_from_slice(s.as_bytes()),
        Value::Bytes(b) => out.extend_from_slice(b),
        Value::Ints(v) => {
            for &x in v {
                match vr {
                    Vr::US => out.extend_from_slice(&(x as u16).to_le_bytes()),
                    Vr::SS => out.extend_from_slice(&(x as i16).to_le_bytes()),
                    Vr::UL => out.extend_from_slice(&(x as u32).to_le_bytes()),
                    Vr::SL => out.extend_from_slice(&(x as i32).to_le_bytes()),
                    _ => {
                        let t = Tag::from_u32(x as u32);
                        out.extend_from_slice(&t.group.to_le_bytes());
                        out.extend_from_slice(&t.element.to_le_bytes());
                    }
                }
            }
        }
        Value::Decimals(v) => {
            for &x in v {
                if vr == Vr::FL {
                    out.extend_from_slice(&(x as f32).to_le_bytes());
                } else {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
    }
}
