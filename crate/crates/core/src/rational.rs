//! Exact rational helpers shared by every module.
//!
//! Domain values (radii, weights, coordinates on the circle) are
//! [`Rational`] = `Ratio<i64>`. The simplex works on [`BigRational`]
//! internally and converts back at its boundary.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = num_rational::Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {input:?}: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.25"` into an
/// exact rational. Anything else is rejected.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: i64 = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den == 0 {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.contains('.') || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        if frac.len() > 15 {
            return Err(err("too many decimal places"));
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: i64 = match int.trim() {
            "" | "-" | "+" => 0,
            t => t.parse().map_err(|_| err("bad integer part"))?,
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| err("bad decimal"))?;
        let magnitude = int_part
            .abs()
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(|| err("overflow"))?;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(signed, scale));
    }
    s.parse::<i64>()
        .map(Rational::from_integer)
        .map_err(|_| err("not a rational"))
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Newtype for printing rationals in canonical form.
pub struct Display<'a>(pub &'a Rational);

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

pub fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Converts back from the big representation; `None` on i64 overflow.
pub fn from_big(r: &BigRational) -> Option<Rational> {
    Some(Rational::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

pub fn big_format(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn min(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Reduces into `[0, 1)`.
pub fn frac_part(r: Rational) -> Rational {
    let f = r - r.floor();
    if f < Rational::zero() {
        f + Rational::one()
    } else {
        f
    }
}

/// Serde adapter: rationals travel as `"p/q"` strings.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_str_opt {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_str_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
