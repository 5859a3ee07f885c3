use std::collections::BTreeSet;

use regex::Regex;

use crate::dicom::{tags, Dataset};
use crate::tokens;

/// One named rule deciding whether a token is PHI.
#[derive(Debug, Clone)]
pub enum TokenMatcher {
    Pattern { name: String, regex: Regex },
    /// Alphanumeric run of at least `min_len` characters containing a digit.
    IdLike { min_len: usize },
}

impl TokenMatcher {
    pub fn pattern(name: &str, regex: &str) -> Result<Self, regex::Error> {
        Ok(TokenMatcher::Pattern {
            name: name.to_string(),
            regex: Regex::new(regex)?,
        })
    }

    pub fn name(&self) -> &str {
        match self {
            TokenMatcher::Pattern { name, .. } => name,
            TokenMatcher::IdLike { .. } => "id_like",
        }
    }

    pub fn matches(&self, token: &str) -> bool {
        match self {
            TokenMatcher::Pattern { regex, .. } => regex.is_match(token),
            TokenMatcher::IdLike { min_len } => {
                token.len() >= *min_len
                    && token.bytes().all(|b| b.is_ascii_alphanumeric())
                    && token.bytes().any(|b| b.is_ascii_digit())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScrubberConfig {
    pub patterns: Vec<TokenMatcher>,
    known_identifiers: BTreeSet<String>,
    pub delimiters: Vec<char>,
}

impl Default for ScrubberConfig {
    fn default() -> Self {
        let p = |n, r| TokenMatcher::pattern(n, r).expect("static regex");
        ScrubberConfig {
            patterns: vec![
                p(
                    "date",
                    r"^(\d{8}|\d{4}-\d{2}-\d{2}|\d{1,2}[-.]\d{1,2}[-.]\d{2,4})$",
                ),
                p("ssn", r"^\d{3}-\d{2}-\d{4}$"),
                p("phone", r"^(\+?1[-.]?)?\(?\d{3}\)?[-.]?\d{3}[-.]\d{4}$"),
                TokenMatcher::IdLike { min_len: 6 },
            ],
            known_identifiers: BTreeSet::new(),
            delimiters: tokens::DEFAULT_EXTRA_DELIMITERS.to_vec(),
        }
    }
}

impl ScrubberConfig {
    /// Adds an exact PHI token, matched case-insensitively. Empty tokens are ignored.
    pub fn add_identifier(&mut self, token: &str) {
        let t = token.trim();
        if !t.is_empty() {
            self.known_identifiers.insert(t.to_uppercase());
        }
    }

    pub fn with_identifiers<'a>(mut self, tokens: impl IntoIterator<Item = &'a str>) -> Self {
        for t in tokens {
            self.add_identifier(t);
        }
        self
    }

    pub fn known_identifiers(&self) -> impl Iterator<Item = &str> {
        self.known_identifiers.iter().map(String::as_str)
    }

    /// Name of the rule that flags `token`, if any.
    pub fn classify(&self, token: &str) -> Option<&str> {
        if self.known_identifiers.contains(&token.to_uppercase()) {
            return Some("known_identifier");
        }
        self.patterns
            .iter()
            .find(|p| p.matches(token))
            .map(TokenMatcher::name)
    }

    /// Copy of this config extended with identifiers harvested from the
    /// patient-identity fields of `ds`.
    pub fn for_dataset(&self, ds: &Dataset) -> Self {
        let mut cfg = self.clone();
        for t in harvest_identifiers(ds) {
            cfg.add_identifier(&t);
        }
        cfg
    }
}

/// Exact PHI tokens from the identity attributes of one dataset: names (whole
/// and per component), IDs, birth date, accession and phone numbers.
pub fn harvest_identifiers(ds: &Dataset) -> Vec<String> {
    let mut out = Vec::new();
    for tag in [
        tags::PATIENT_NAME,
        tags::REFERRING_PHYSICIAN_NAME,
        tags::OPERATORS_NAME,
    ] {
        if let Some(name) = ds.text(tag) {
            for v in name.split('\\') {
                out.push(v.to_string());
                out.extend(
                    v.split(['^', ' '])
                        .filter(|c| c.len() >= 2)
                        .map(str::to_string),
                );
            }
        }
    }
    for tag in [
        tags::PATIENT_ID,
        tags::OTHER_PATIENT_IDS,
        tags::PATIENT_BIRTH_DATE,
        tags::ACCESSION_NUMBER,
        tags::PATIENT_TELEPHONE_NUMBERS,
    ] {
        if let Some(v) = ds.text(tag) {
            out.extend(v.split('\\').map(str::to_string));
        }
    }
    out.retain(|t| !t.trim().is_empty());
    out
}

/// Removes PHI tokens. Returns the surviving tokens joined by single spaces
/// and the removed tokens, both in input order.
pub fn scrub_text(value: &str, cfg: &ScrubberConfig) -> (String, Vec<String>) {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for tok in tokens::split_with(value, &cfg.delimiters) {
        if cfg.classify(tok).is_some() {
            removed.push(tok.to_string());
        } else {
            kept.push(tok);
        }
    }
    (kept.join(" "), removed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicom::{DataElement, Vr};

    #[test]
    fn ssn_in_description() {
        let (clean, removed) =
            scrub_text("BREAST^ROUTINE for MASS for 311-25-3722", &ScrubberConfig::default());
        assert_eq!(clean, "BREAST^ROUTINE for MASS for");
        assert_eq!(removed, ["311-25-3722"]);
    }

    #[test]
    fn empty_input() {
        let (clean, removed) = scrub_text("", &ScrubberConfig::default());
        assert_eq!(clean, "");
        assert!(removed.is_empty());
    }

    #[test]
    fn known_identifier_and_date() {
        let cfg = ScrubberConfig::default().with_identifiers(["DOE^JANE"]);
        let (clean, removed) = scrub_text("seen by DOE^JANE on 20230415", &cfg);
        assert_eq!(clean, "seen by on");
        assert_eq!(removed, ["DOE^JANE", "20230415"]);
        let (_, removed) = scrub_text("seen by doe^jane", &cfg);
        assert_eq!(removed, ["doe^jane"]);
    }

    #[test]
    fn patterns() {
        let cfg = ScrubberConfig::default();
        for phi in ["555-867-5309", "(555)867-5309", "2023-04-15", "4-15-2023", "MRN123456", "A1B2C3"] {
            assert!(cfg.classify(phi).is_some(), "{phi}");
        }
        for ok in ["BREAST^ROUTINE", "T1", "AXIAL", "3D", "CONTRAST", "for", "ROUTINE"] {
            assert!(cfg.classify(ok).is_none(), "{ok}");
        }
    }

    #[test]
    fn empty_identifiers_are_ignored() {
        let cfg = ScrubberConfig::default().with_identifiers(["", "  "]);
        assert_eq!(cfg.known_identifiers().count(), 0);
    }

    #[test]
    fn harvest_from_identity_fields() {
        let ds: Dataset = [
            DataElement::text(tags::PATIENT_NAME, Vr::PN, "DOE^JANE"),
            DataElement::text(tags::PATIENT_ID, Vr::LO, "PAT00042"),
            DataElement::text(tags::PATIENT_BIRTH_DATE, Vr::DA, "19800101"),
            DataElement::text(tags::STUDY_DESCRIPTION, Vr::LO, "CHEST"),
        ]
        .into_iter()
        .collect();
        let got = harvest_identifiers(&ds);
        assert_eq!(got, ["DOE^JANE", "DOE", "JANE", "PAT00042", "19800101"]);
        let (clean, removed) = scrub_text("Jane Doe CHEST", &ScrubberConfig::default().for_dataset(&ds));
        assert_eq!(clean, "CHEST");
        assert_eq!(removed, ["Jane", "Doe"]);
    }
}
