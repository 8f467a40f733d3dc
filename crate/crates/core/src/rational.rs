//! Exact numbers used throughout the crate.
//!
//! Probabilities are arbitrary-precision rationals kept in lowest terms,
//! costs are arbitrary-precision naturals. Nothing here ever touches a float.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

use crate::error::ParseError;

/// Exact rational number in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Non-negative integer cost.
pub type Cost = BigUint;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn cost_to_rational(c: &Cost) -> Rational {
    Rational::from_integer(BigInt::from(c.clone()))
}

/// Parses `"num/den"` or a plain integer `"n"`. Decimal points and
/// exponents are rejected.
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let text = text.trim();
    let bad = || ParseError::Rational(text.to_string());
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let digits_ok = |s: &str, signed: bool| {
        let body = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
        !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits_ok(num, true) || !digits_ok(den, false) {
        return Err(bad());
    }
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Parses a non-negative decimal integer of arbitrary size.
pub fn parse_cost(text: &str) -> Result<Cost, ParseError> {
    let text = text.trim();
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::Cost(text.to_string()));
    }
    Cost::from_str(text).map_err(|_| ParseError::Cost(text.to_string()))
}

/// Canonical text form: `"n"` for integers, `"num/den"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Smallest integer `>= r` for non-negative `r`.
pub fn ceil_nonneg(r: &Rational) -> BigUint {
    debug_assert!(!r.is_negative());
    r.ceil().to_integer().to_biguint().unwrap_or_default()
}

/// Bit length of the largest numerator or denominator seen, used by the
/// solver statistics.
pub fn bit_size(r: &Rational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}
