//! Whole-token splitting shared by the text scrubber and the scorer.
//!
//! `^` is not a delimiter: person-name style tokens such as `DOE^JANE` or
//! `BREAST^ROUTINE` stay whole.

/// Extra delimiters beyond whitespace.
pub const DEFAULT_EXTRA_DELIMITERS: [char; 3] = [',', ';', '/'];

pub fn is_delimiter(c: char, extra: &[char]) -> bool {
    c.is_whitespace() || extra.contains(&c)
}

pub fn split_with<'a>(value: &'a str, extra: &'a [char]) -> impl Iterator<Item = &'a str> + 'a {
    value
        .split(move |c| is_delimiter(c, extra))
        .filter(|t| !t.is_empty())
}

pub fn split(value: &str) -> impl Iterator<Item = &str> {
    split_with(value, &DEFAULT_EXTRA_DELIMITERS)
}

/// Case-sensitive whole-token containment.
pub fn contains_token(value: &str, token: &str) -> bool {
    split(value).any(|t| t == token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_whitespace_and_extras_only() {
        let toks: Vec<_> = split("BREAST^ROUTINE for  MASS,for/311-25-3722;x").collect();
        assert_eq!(
            toks,
            ["BREAST^ROUTINE", "for", "MASS", "for", "311-25-3722", "x"]
        );
        assert_eq!(split("").count(), 0);
        assert_eq!(split(" \t ,").count(), 0);
    }

    #[test]
    fn containment_is_whole_token() {
        assert!(contains_token("BREAST^ROUTINE for MASS", "MASS"));
        assert!(!contains_token("BREAST^ROUTINE for MASS", "BREAST"));
        assert!(!contains_token("MASSES", "MASS"));
        assert!(!contains_token("mass", "MASS"));
    }
}
