//! Scalar abstraction shared by every analysis in the crate.
//!
//! The same code paths run over exact rationals ([`Rat`](crate::Rat)) and
//! over IEEE floats. Exact scalars compare with zero tolerance and can be
//! hashed, which is what enables eventual-period detection on orbits.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {input:?} as a number: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: String,
}

impl ParseScalarError {
    fn new(input: &str, reason: impl Into<String>) -> Self {
        ParseScalarError {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// Number type the maps, cylinders and distributional functions are built on.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Hashable identity used to recognise revisited orbit points.
    type Key: Hash + Eq + Clone + Send + Sync;

    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Comparison slack: zero for exact types.
    fn tolerance() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_f64(value: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Parses `"p/q"`, integers and plain decimals such as `"0.125"`.
    fn parse(text: &str) -> Result<Self, ParseScalarError>;

    /// Serialises in the canonical text form accepted by [`Scalar::parse`].
    fn to_text(&self) -> String;

    /// Orbit key; `None` when the type cannot certify equality.
    fn key(&self) -> Option<Self::Key>;

    fn midpoint(a: &Self, b: &Self) -> Self {
        (a.clone() + b.clone()) / (Self::one() + Self::one())
    }

    fn approx_eq(a: &Self, b: &Self) -> bool {
        if Self::EXACT {
            a == b
        } else {
            (a.clone() - b.clone()).abs() <= Self::tolerance()
        }
    }

    /// `a <= b` up to tolerance.
    fn approx_le(a: &Self, b: &Self) -> bool {
        *a <= b.clone() + Self::tolerance()
    }

    /// `a < b` by more than the tolerance.
    fn definitely_lt(a: &Self, b: &Self) -> bool {
        a.clone() + Self::tolerance() < *b
    }
}

pub(crate) fn max_of<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub(crate) fn min_of<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Splits `"p/q"` into its two halves, or returns the decimal text whole.
fn split_fraction(text: &str) -> (&str, Option<&str>) {
    match text.split_once('/') {
        Some((p, q)) => (p.trim(), Some(q.trim())),
        None => (text.trim(), None),
    }
}

fn parse_decimal_rational(text: &str) -> Result<BigRational, ParseScalarError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseScalarError::new(text, "empty"));
    }
    let (mantissa, exponent) = match trimmed.find(['e', 'E']) {
        Some(pos) => {
            let exp = trimmed[pos + 1..]
                .parse::<i32>()
                .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
            (&trimmed[..pos], exp)
        }
        None => (trimmed, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseScalarError::new(text, "no digits"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(ParseScalarError::new(text, "invalid digit"));
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if joined.is_empty() { "0" } else { &joined })
        .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

impl Scalar for BigRational {
    type Key = BigRational;
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(value: f64) -> Option<Self> {
        BigRational::from_float(value)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        match split_fraction(text) {
            (p, Some(q)) => {
                let num = BigInt::from_str(p).map_err(|e| ParseScalarError::new(text, e.to_string()))?;
                let den = BigInt::from_str(q).map_err(|e| ParseScalarError::new(text, e.to_string()))?;
                if den.is_zero() {
                    return Err(ParseScalarError::new(text, "zero denominator"));
                }
                Ok(BigRational::new(num, den))
            }
            (decimal, None) => parse_decimal_rational(decimal),
        }
    }

    fn to_text(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn key(&self) -> Option<Self::Key> {
        Some(self.clone())
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            type Key = u64;
            const EXACT: bool = false;

            fn tolerance() -> Self {
                $tol
            }

            fn from_ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn from_f64(value: f64) -> Option<Self> {
                value.is_finite().then_some(value as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn parse(text: &str) -> Result<Self, ParseScalarError> {
                match split_fraction(text) {
                    (p, Some(q)) => {
                        let num: $t = p.parse().map_err(|e: std::num::ParseFloatError| {
                            ParseScalarError::new(text, e.to_string())
                        })?;
                        let den: $t = q.parse().map_err(|e: std::num::ParseFloatError| {
                            ParseScalarError::new(text, e.to_string())
                        })?;
                        if den == 0.0 {
                            return Err(ParseScalarError::new(text, "zero denominator"));
                        }
                        Ok(num / den)
                    }
                    (decimal, None) => decimal
                        .parse()
                        .map_err(|e: std::num::ParseFloatError| ParseScalarError::new(text, e.to_string())),
                }
            }

            fn to_text(&self) -> String {
                format!("{:?}", self)
            }

            fn key(&self) -> Option<Self::Key> {
                None
            }
        }
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-6);
