use std::fmt;

/// Value representation of a data element.
///
/// Codes outside the supported set are read as [`Vr::UN`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vr {
    AE,
    AS,
    AT,
    CS,
    DA,
    DS,
    DT,
    FL,
    FD,
    IS,
    LO,
    LT,
    OB,
    OW,
    PN,
    SH,
    SL,
    SQ,
    SS,
    ST,
    TM,
    UI,
    UL,
    UN,
    US,
    UT,
}

/// How the value bytes of a VR are held in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    Integer,
    Decimal,
    Bytes,
    Sequence,
}

impl Vr {
    pub const ALL: [Vr; 26] = [
        Vr::AE,
        Vr::AS,
        Vr::AT,
        Vr::CS,
        Vr::DA,
        Vr::DS,
        Vr::DT,
        Vr::FL,
        Vr::FD,
        Vr::IS,
        Vr::LO,
        Vr::LT,
        Vr::OB,
        Vr::OW,
        Vr::PN,
        Vr::SH,
        Vr::SL,
        Vr::SQ,
        Vr::SS,
        Vr::ST,
        Vr::TM,
        Vr::UI,
        Vr::UL,
        Vr::UN,
        Vr::US,
        Vr::UT,
    ];

    pub fn from_code(code: [u8; 2]) -> Vr {
        match &code {
            b"AE" => Vr::AE,
            b"AS" => Vr::AS,
            b"AT" => Vr::AT,
            b"CS" => Vr::CS,
            b"DA" => Vr::DA,
            b"DS" => Vr::DS,
            b"DT" => Vr::DT,
            b"FL" => Vr::FL,
            b"FD" => Vr::FD,
            b"IS" => Vr::IS,
            b"LO" => Vr::LO,
            b"LT" => Vr::LT,
            b"OB" => Vr::OB,
            b"OW" => Vr::OW,
            b"PN" => Vr::PN,
            b"SH" => Vr::SH,
            b"SL" => Vr::SL,
            b"SQ" => Vr::SQ,
            b"SS" => Vr::SS,
            b"ST" => Vr::ST,
            b"TM" => Vr::TM,
            b"UI" => Vr::UI,
            b"UL" => Vr::UL,
            b"US" => Vr::US,
            b"UT" => Vr::UT,
            _ => Vr::UN,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Vr::AE => "AE",
            Vr::AS => "AS",
            Vr::AT => "AT",
            Vr::CS => "CS",
            Vr::DA => "DA",
            Vr::DS => "DS",
            Vr::DT => "DT",
            Vr::FL => "FL",
            Vr::FD => "FD",
            Vr::IS => "IS",
            Vr::LO => "LO",
            Vr::LT => "LT",
            Vr::OB => "OB",
            Vr::OW => "OW",
            Vr::PN => "PN",
            Vr::SH => "SH",
            Vr::SL => "SL",
            Vr::SQ => "SQ",
            Vr::SS => "SS",
            Vr::ST => "ST",
            Vr::TM => "TM",
            Vr::UI => "UI",
            Vr::UL => "UL",
            Vr::UN => "UN",
            Vr::US => "US",
            Vr::UT => "UT",
        }
    }

    /// Explicit-VR encodings with a reserved 2 bytes and a 32-bit length.
    pub fn has_long_length(self) -> bool {
        matches!(self, Vr::OB | Vr::OW | Vr::SQ | Vr::UN | Vr::UT)
    }

    pub fn value_kind(self) -> ValueKind {
        match self {
            Vr::AE
            | Vr::AS
            | Vr::CS
            | Vr::DA
            | Vr::DS
            | Vr::DT
            | Vr::IS
            | Vr::LO
            | Vr::LT
            | Vr::PN
            | Vr::SH
            | Vr::ST
            | Vr::TM
            | Vr::UI
            | Vr::UT => ValueKind::Text,
            Vr::AT | Vr::SL | Vr::SS | Vr::UL | Vr::US => ValueKind::Integer,
            Vr::FL | Vr::FD => ValueKind::Decimal,
            Vr::OB | Vr::OW | Vr::UN => ValueKind::Bytes,
            Vr::SQ => ValueKind::Sequence,
        }
    }

    pub fn is_text(self) -> bool {
        self.value_kind() == ValueKind::Text
    }

    /// Free-form character VRs that a text scrubber may rewrite.
    pub fn is_free_text(self) -> bool {
        matches!(self, Vr::LO | Vr::LT | Vr::PN | Vr::SH | Vr::ST | Vr::UT)
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, Vr::DA | Vr::DT | Vr::TM)
    }

    /// Padding byte for odd-length values.
    pub fn padding(self) -> u8 {
        match self {
            Vr::UI | Vr::OB | Vr::UN => 0x00,
            _ if self.is_text() => b' ',
            _ => 0x00,
        }
    }

    /// Width in bytes of one binary numeric value.
    pub(crate) fn binary_width(self) -> usize {
        match self {
            Vr::SS | Vr::US => 2,
            Vr::AT | Vr::SL | Vr::UL | Vr::FL => 4,
            Vr::FD => 8,
            _ => 1,
        }
    }
}

impl fmt::Display for Vr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip() {
        for vr in Vr::ALL {
            let c = vr.code().as_bytes();
            assert_eq!(Vr::from_code([c[0], c[1]]), vr);
        }
    }

    #[test]
    fn unknown_codes_are_un() {
        assert_eq!(Vr::from_code(*b"UC"), Vr::UN);
        assert_eq!(Vr::from_code(*b"zz"), Vr::UN);
    }

    #[test]
    fn ui_pads_with_nul_text_with_space() {
        assert_eq!(Vr::UI.padding(), 0);
        assert_eq!(Vr::LO.padding(), b' ');
        assert_eq!(Vr::PN.padding(), b' ');
    }
}
