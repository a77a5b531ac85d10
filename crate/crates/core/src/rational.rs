//! Exact rational arithmetic for densities and regularity parameters.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// All densities, ε and δ values are carried as reduced `i64` fractions.
pub type Rational = num_rational::Ratio<i64>;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// `|a - b|`
pub fn abs_diff(a: Rational, b: Rational) -> Rational {
    (a - b).abs()
}

/// Nearest integer to `r`, halves rounded away from zero.
pub fn round_half_up(r: Rational) -> i64 {
    let (q, rem) = r.numer().div_mod_floor(r.denom());
    if rem * 2 >= *r.denom() {
        q + 1
    } else {
        q
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.375"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::arg(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::arg(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) || frac_part.len() > 18 {
        return Err(bad());
    }
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let mut value = Rational::from_integer(int);
    if !frac_part.is_empty() {
        let den = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(bad)?;
        let num: i64 = frac_part.parse().map_err(|_| bad())?;
        value += Rational::new(num, den);
    }
    Ok(if neg { -value } else { value })
}

/// `"p/q"` rendering, `"p"` for integers.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn to_f64(r: Rational) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        *r.numer() as f64 / *r.denom() as f64
    }
}

/// Serde adapter storing a [`Rational`] as the string `"p/q"`.
pub mod serde_str {
    use serde::{de, Deserialize, Deserializer, Serializer};

    use super::{parse_rational, Display, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&Display(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("0.5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(".375").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("1").unwrap(), ratio(1, 1));
        assert_eq!(parse_rational(" 6/8 ").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_up(ratio(5, 2)), 3);
        assert_eq!(round_half_up(ratio(7, 3)), 2);
        assert_eq!(round_half_up(ratio(8, 3)), 3);
        assert_eq!(round_half_up(ratio(4, 1)), 4);
    }

    #[test]
    fn display() {
        assert_eq!(Display(&ratio(2, 4)).to_string(), "1/2");
        assert_eq!(Display(&ratio(3, 1)).to_string(), "3");
    }
}
