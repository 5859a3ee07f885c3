use chrono::{Duration, NaiveDate};
use regex::Regex;
use std::sync::OnceLock;

use super::DeidError;
use crate::dicom::Vr;

pub const MAX_OFFSET_DAYS: i64 = 36_500;

fn dt_suffix() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^(\d{2}(\d{2}(\d{2}(\.\d{1,6})?)?)?)?([+-]\d{4})?$").expect("static regex")
    })
}

fn shift_day(date: &str, offset_days: i64) -> Option<String> {
    if date.len() != 8 || !date.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let d = NaiveDate::parse_from_str(date, "%Y%m%d").ok()?;
    let shifted = d.checked_add_signed(Duration::days(offset_days))?;
    Some(shifted.format("%Y%m%d").to_string())
}

fn shift_one(value: &str, vr: Vr, offset_days: i64) -> Option<String> {
    match vr {
        Vr::DA => shift_day(value.trim(), offset_days),
        Vr::DT => {
            let v = value.trim();
            if v.len() < 8 || !v.is_char_boundary(8) {
                return None;
            }
            let (date, rest) = v.split_at(8);
            if !dt_suffix().is_match(rest) {
                return None;
            }
            Some(shift_day(date, offset_days)? + rest)
        }
        _ => Some(value.to_string()),
    }
}

/// Shifts every value of a DA or DT element by `offset_days`, keeping the
/// time-of-day and fraction. TM values pass through.
pub fn shift_date(value: &str, vr: Vr, offset_days: i64) -> Result<String, DeidError> {
    if offset_days.abs() > MAX_OFFSET_DAYS {
        return Err(DeidError::OffsetOutOfRange(offset_days));
    }
    if vr == Vr::TM {
        return Ok(value.to_string());
    }
    value
        .split('\\')
        .map(|v| {
            shift_one(v, vr, offset_days).ok_or_else(|| DeidError::UnparseableDate(value.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(|parts| parts.join("\\"))
}

/// True if `value` reads as a DA, or as the date part of a DT.
pub fn is_date_like(value: &str) -> bool {
    let v = value.trim();
    if v.len() == 8 {
        return shift_day(v, 0).is_some();
    }
    shift_one(v, Vr::DT, 0).is_some()
}
