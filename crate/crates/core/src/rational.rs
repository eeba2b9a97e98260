//! Exact rationals and their `"p/q"` text form.

use num_rational::Ratio;

/// Exact rate or cache size in file units.
///
/// Displayed in lowest terms as `"p/q"`, or `"p"` when the denominator is 1.
pub type Rational = Ratio<i64>;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

pub fn int(value: usize) -> Rational {
    Rational::from_integer(value as i64)
}

pub fn parse(text: &str) -> crate::Result<Rational> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer: i64 = numer
        .parse()
        .map_err(|_| crate::Error::Malformed(format!("bad rational {text:?}")))?;
    let denom: i64 = denom
        .parse()
        .map_err(|_| crate::Error::Malformed(format!("bad rational {text:?}")))?;
    if denom == 0 {
        return Err(crate::Error::Malformed(format!(
            "zero denominator in {text:?}"
        )));
    }
    Ok(Rational::new(numer, denom))
}

/// Serde adapter storing a [`Rational`] as its `"p/q"` string.
pub mod as_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(value)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(rat(27, 12).to_string(), "9/4");
        assert_eq!(rat(6, 3).to_string(), "2");
        assert_eq!(rat(0, 5).to_string(), "0");
    }

    #[test]
    fn parse_accepts_integers_and_fractions() {
        assert_eq!(parse("9/4").unwrap(), rat(9, 4));
        assert_eq!(parse(" 3 ").unwrap(), int(3));
        assert_eq!(parse("2/4").unwrap(), rat(1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("").is_err());
    }
}
