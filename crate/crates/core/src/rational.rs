//! Exact scalars.
//!
//! Probability masses, LP values and dataset coordinates are [`Rational`]s.
//! Radii are carried as [`Epsilon`], which stores ε² so that radii such as
//! `1.1/√2` stay exact: every comparison of a nonnegative rational quantity
//! against a power of ε can be squared on both sides.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a/b"`, integer, or decimal literals (`"0.9"`, `"-1.5e-3"`) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational literal: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{whole}{frac}");
    let mut num = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits }).map_err(|_| bad())?;
    if negative {
        num = -num;
    }
    let scale = exponent - frac.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(Error::Parse(format!("exponent out of range in {text:?}")));
    }
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(num * Pow::pow(&ten, scale as u32))
    } else {
        Rational::new(num, Pow::pow(&ten, (-scale) as u32))
    };
    Ok(value)
}

/// `"a/b"`, or `"a"` when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

pub fn to_f64(value: &Rational) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Shift both parts down to 64 significant bits before dividing.
    let num = value.numer();
    let den = value.denom();
    let shift = |x: &BigInt| -> (f64, i64) {
        let bits = x.bits() as i64;
        let drop = (bits - 64).max(0);
        let m = (x.magnitude() >> drop as usize).to_f64().unwrap_or(f64::MAX);
        (m, drop)
    };
    let (nm, ne) = shift(num);
    let (dm, de) = shift(den);
    let mag = nm / dm * 2f64.powi((ne - de).clamp(-2000, 2000) as i32);
    if num.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

/// Exact binary value of a finite float.
pub fn from_f64(value: f64) -> Rational {
    Rational::from_float(value).unwrap_or_else(Rational::zero)
}

/// Nearest multiple of `10^-digits`.
pub fn round_decimal(value: f64, digits: u32) -> Rational {
    let scale = 10f64.powi(digits as i32);
    let scaled = (value * scale).round();
    let num = from_f64(scaled).to_integer();
    Rational::new(num, Pow::pow(&BigInt::from(10), digits))
}

/// Exact square root, when the argument is the square of a rational.
pub fn exact_sqrt(value: &Rational) -> Option<Rational> {
    if value.is_negative() {
        return None;
    }
    let n = value.numer();
    let d = value.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

pub fn pow(value: &Rational, exponent: u32) -> Rational {
    Pow::pow(value, exponent)
}

/// A nonnegative radius stored through its square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Epsilon {
    squared: Rational,
}

impl Epsilon {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Validation(format!("epsilon must be nonnegative, got {value}")));
        }
        Ok(Self { squared: &value * &value })
    }

    /// ε = √`squared`.
    pub fn from_square(squared: Rational) -> Result<Self> {
        if squared.is_negative() {
            return Err(Error::Validation(format!("epsilon² must be nonnegative, got {squared}")));
        }
        Ok(Self { squared })
    }

    pub fn squared(&self) -> &Rational {
        &self.squared
    }

    /// ε itself when it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        exact_sqrt(&self.squared)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.squared).sqrt()
    }

    /// `factor · ε` for a nonnegative rational factor.
    pub fn scaled(&self, factor: &Rational) -> Self {
        debug_assert!(!factor.is_negative());
        Self { squared: &self.squared * factor * factor }
    }

    /// Compares `r` against ε, where `r` is known only through `r^power = value`
    /// with `value ≥ 0`. Exact.
    pub fn compare_power(&self, value: &Rational, power: u32) -> Ordering {
        debug_assert!(!value.is_negative());
        let lhs = value * value;
        let rhs = pow(&self.squared, power);
        lhs.cmp(&rhs)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let s = text.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            return Self::from_square(parse_rational(inner)?);
        }
        Self::new(parse_rational(s)?)
    }
}

impl fmt::Display for Epsilon {
    /// Rational radii print as rationals; irrational ones as `sqrt(a/b)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "sqrt({})", self.squared),
        }
    }
}

/// Serde adapters writing rationals as `"a/b"` strings.
pub mod serde_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        use super::super::{format_rational, parse_rational, Rational};

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&format_rational(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts.iter().map(|t| parse_rational(t).map_err(serde::de::Error::custom)).collect()
        }
    }
}
