//! Exact rational helpers shared by every module.
//!
//! All quantities that reach a tightness test (`h_{e,v} = x_v`, `x_v < 1/f`)
//! are [`Rational`]s, and every machine-readable output renders them as
//! `p/q` strings (or a bare integer when the denominator is one).

use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `p/q` (with `q > 0`) or a bare integer.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    match text.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p).ok()?;
            let q = BigInt::from_str(q).ok()?;
            if !q.is_positive() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => BigInt::from_str(text).ok().map(Rational::from_integer),
    }
}

pub fn render(q: &Rational) -> String {
    q.to_string()
}

pub fn ceil(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn is_integral(q: &Rational) -> bool {
    q.is_integer()
}

pub fn is_nonnegative(q: &Rational) -> bool {
    !q.is_negative()
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Serde adapter rendering a rational as a `p/q` string.
pub mod as_string {
    use super::{parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).ok_or_else(|| D::Error::custom(format!("bad rational {text:?}")))
    }
}

/// Serializes an integer as its decimal string.
pub fn int_as_string<S: serde::Serializer>(value: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

/// Serde adapter for `Vec<Rational>`.
pub mod vec_as_string {
    use super::{parse_rational, Rational};
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&v.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).ok_or_else(|| D::Error::custom(format!("bad rational {t:?}"))))
            .collect()
    }
}
