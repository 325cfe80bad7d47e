//! Exact rational scalars for costs and flows.
//!
//! Costs and flows are kept as arbitrary-precision rationals so that the
//! activation comparison `b_i >= c_i` never suffers float misclassification
//! at the boundary.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("cannot parse {0:?} as a rational (use \"p/q\", a decimal string, or an integer)")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// Parse `"p/q"`, a decimal string like `"1.25"`, or a plain integer.
pub fn parse_rational(text: &str) -> Result<BigRational, RationalParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| RationalParseError::Malformed(text.to_owned()))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| RationalParseError::Malformed(text.to_owned()))?;
        if d.is_zero() {
            return Err(RationalParseError::ZeroDenominator(text.to_owned()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RationalParseError::Malformed(text.to_owned()));
        }
        let negative = whole.trim_start().starts_with('-');
        let whole_part = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| RationalParseError::Malformed(text.to_owned()))?
        };
        let frac_num =
            BigInt::from_str(frac).map_err(|_| RationalParseError::Malformed(text.to_owned()))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let magnitude = whole_part.abs() * &scale + frac_num;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(signed, scale));
    }
    let n = BigInt::from_str(s).map_err(|_| RationalParseError::Malformed(text.to_owned()))?;
    Ok(BigRational::from_integer(n))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Convert an integral rational to `u64`; `None` if fractional, negative, or too large.
pub fn rational_to_u64(r: &BigRational) -> Option<u64> {
    if !r.denom().is_one() || r.is_negative() {
        return None;
    }
    u64::try_from(r.numer().clone()).ok()
}
