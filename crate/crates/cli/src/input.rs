//! Sequence ingestion: whitespace/comma separated decimals, or a JSON array
//! when the first non-blank character is `[`.

use ordstat_core::RealSequence;

#[derive(Debug, PartialEq)]
pub struct ParseError(pub String);

/// Optional sign, digits with optional fraction (or a bare fraction),
/// optional exponent. Rejects `inf`, `nan` and friends that `f64::from_str`
/// would otherwise accept.
fn is_decimal_literal(tok: &str) -> bool {
    let b = tok.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i > int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits |= i > frac_start;
    }
    if !digits {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

pub fn parse_sequence(text: &str) -> Result<RealSequence, ParseError> {
    let values = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<f64>>(text)
            .map_err(|e| ParseError(format!("invalid JSON array: {e}")))?
    } else {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                if !is_decimal_literal(t) {
                    return Err(ParseError(format!("not a decimal literal: {t:?}")));
                }
                t.parse::<f64>()
                    .map_err(|e| ParseError(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    RealSequence::new(values).map_err(|e| ParseError(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(s: &str) -> Vec<f64> {
        parse_sequence(s).unwrap().values().to_vec()
    }

    #[test]
    fn separators() {
        assert_eq!(values("5 1 9"), [5.0, 1.0, 9.0]);
        assert_eq!(values("5,1,9\n"), [5.0, 1.0, 9.0]);
        assert_eq!(values(" 5 ,\t1,,9 "), [5.0, 1.0, 9.0]);
    }

    #[test]
    fn literal_forms() {
        assert_eq!(
            values("-3 +2.5 .5 4. 1e3 -2E-2"),
            [-3.0, 2.5, 0.5, 4.0, 1000.0, -0.02]
        );
    }

    #[test]
    fn json_array() {
        assert_eq!(values("[4, 1.5, -2e1]"), [4.0, 1.5, -20.0]);
        assert!(parse_sequence("[1, \"a\"]").is_err());
        assert!(parse_sequence("[]").is_err());
    }

    #[test]
    fn rejects_non_finite_and_junk() {
        for bad in [
            "nan", "1 inf", "Infinity", "-inf", "1e999", "1e", "--1", ".", "1x", "0x10", "",
        ] {
            assert!(parse_sequence(bad).is_err(), "{bad:?}");
        }
    }
}
