//! Exact certainty and truth degrees in `[0, 1]`.
//!
//! Every weight, truth value, possibility value and necessity value in the
//! crate is a [`Degree`]: a reduced rational number clamped to the unit
//! interval at construction time. Only three operations ever combine degrees:
//! `min`, the Gödel implication and its reciprocal. Both are closed over the
//! rationals, so equality is always exact.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedSub, One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational used for degrees, domain points and trapezoid parameters.
pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("`{0}` is not a number")]
    Malformed(String),
    #[error("`{0}` does not fit in a 64-bit rational")]
    Overflow(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("degree {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("arithmetic overflow")]
    ArithmeticOverflow,
}

/// A value in the closed unit interval, stored exactly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Degree(Rational);

impl Degree {
    pub const ZERO: Degree = Degree(Ratio::new_raw(0, 1));
    pub const ONE: Degree = Degree(Ratio::new_raw(1, 1));

    /// Wraps a rational, rejecting anything outside `[0, 1]`.
    pub fn new(value: Rational) -> Result<Self, NumberError> {
        if value < Rational::zero() || value > Rational::one() {
            return Err(NumberError::OutOfRange(format_rational(&value)));
        }
        Ok(Degree(value))
    }

    /// `num/den`, reduced. Panics if the fraction is not a valid degree, so
    /// it is meant for literals in code and tests.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Degree::new(Rational::new(num, den)).expect("degree literal outside [0, 1]")
    }

    pub fn value(self) -> Rational {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(self) -> bool {
        self.0.is_one()
    }

    /// `1 - x`.
    pub fn complement(self) -> Self {
        Degree(Rational::one() - self.0)
    }

    /// Midpoint of two degrees, or `None` if the arithmetic would overflow.
    pub fn midpoint(self, other: Degree) -> Option<Degree> {
        let sum = self.0.checked_add(&other.0)?;
        let half = sum.checked_div(&Rational::from_integer(2))?;
        Some(Degree(half))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Degree({})", format_rational(&self.0))
    }
}

impl FromStr for Degree {
    type Err = NumberError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Degree::new(parse_rational(s)?)
    }
}

impl TryFrom<Rational> for Degree {
    type Error = NumberError;

    fn try_from(value: Rational) -> Result<Self, Self::Error> {
        Degree::new(value)
    }
}

#[derive(Serialize, Deserialize)]
struct RawDegree {
    num: i64,
    den: i64,
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawDegree {
            num: self.numer(),
            den: self.denom(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawDegree::deserialize(deserializer)?;
        if raw.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Degree::new(Rational::new(raw.num, raw.den)).map_err(serde::de::Error::custom)
    }
}

/// Gödel residuated implication: `1` if `x <= y`, else `y`.
pub fn goedel_implies(x: Degree, y: Degree) -> Degree {
    if x <= y {
        Degree::ONE
    } else {
        y
    }
}

/// Reciprocal Gödel implication: `1` if `x <= y`, else `1 - x`.
///
/// This is the operator inside every necessity measure.
pub fn reciprocal_implies(x: Degree, y: Degree) -> Degree {
    if x <= y {
        Degree::ONE
    } else {
        x.complement()
    }
}

/// Minimum over an iterator of degrees; `1` (the neutral element) when empty.
pub fn min_all<I: IntoIterator<Item = Degree>>(degrees: I) -> Degree {
    degrees.into_iter().fold(Degree::ONE, Degree::min)
}

/// Maximum over an iterator of degrees; `0` when empty.
pub fn max_all<I: IntoIterator<Item = Degree>>(degrees: I) -> Degree {
    degrees.into_iter().fold(Degree::ZERO, Degree::max)
}

/// Parses `3`, `-2`, `0.75` or `3/4` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, NumberError> {
    let malformed = || NumberError::Malformed(text.to_string());
    let overflow = || NumberError::Overflow(text.to_string());

    if let Some((num, den)) = text.split_once('/') {
        let num = parse_integer(num)
            .ok_or_else(malformed)?
            .ok_or_else(overflow)?;
        let den = parse_integer(den)
            .ok_or_else(malformed)?
            .ok_or_else(overflow)?;
        if den == 0 {
            return Err(NumberError::ZeroDenominator(text.to_string()));
        }
        if den < 0 {
            return Err(malformed());
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(malformed());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(malformed());
    }
    if body.ends_with('.') {
        return Err(malformed());
    }
    let digits = format!("{whole}{frac}");
    let digits = digits.trim_start_matches('0');
    let mantissa: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| overflow())?
    };
    let scale = 10i64.checked_pow(frac.len() as u32).ok_or_else(overflow)?;
    let value = Rational::new(mantissa, scale);
    Ok(if negative { -value } else { value })
}

// Outer `None`: not an integer. Inner `None`: does not fit.
fn parse_integer(text: &str) -> Option<Option<i64>> {
    let digits = text.strip_prefix('-').unwrap_or(text);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(text.parse().ok())
}

/// Exact decimal when the denominator has no prime factors other than 2 and
/// 5, `num/den` otherwise.
pub fn format_rational(value: &Rational) -> String {
    let num = *value.numer();
    let den = *value.denom();
    if den == 1 {
        return num.to_string();
    }
    let mut rest = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{num}/{den}");
    }
    let places = twos.max(fives);
    let Some(scale) = 10i128.checked_pow(places) else {
        return format!("{num}/{den}");
    };
    let Some(scaled) = (num as i128).checked_mul(scale / den as i128) else {
        return format!("{num}/{den}");
    };
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.abs();
    let whole = scaled / scale;
    let frac = scaled % scale;
    let frac = format!("{:0width$}", frac, width = places as usize);
    format!("{sign}{whole}.{}", frac.trim_end_matches('0'))
}

pub(crate) fn checked_sub(a: &Rational, b: &Rational) -> Result<Rational, NumberError> {
    a.checked_sub(b).ok_or(NumberError::ArithmeticOverflow)
}

pub(crate) fn checked_div(a: &Rational, b: &Rational) -> Result<Rational, NumberError> {
    a.checked_div(b).ok_or(NumberError::ArithmeticOverflow)
}

pub(crate) fn checked_add(a: &Rational, b: &Rational) -> Result<Rational, NumberError> {
    a.checked_add(b).ok_or(NumberError::ArithmeticOverflow)
}
