//! Scalar field abstraction: exact rationals or binary floats.
//!
//! A computation picks one scalar type and keeps it throughout. Rational
//! comparisons are exact and ignore the tolerance argument; float
//! comparisons accept an absolute slack.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact scalar used for lattice identities.
pub type Rational = BigRational;

/// Absolute tolerance for float-mode comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const EXACT: Tolerance = Tolerance(0.0);
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// `true` when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    fn to_f64(&self) -> f64;

    /// Exact for rationals: every finite float is a dyadic rational.
    fn from_f64(v: f64) -> Self;

    /// Textual scalar: `"p/q"`, `"p"` or a decimal float literal.
    fn parse_str(s: &str) -> Result<Self>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Self::parse_str(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Self::from_int(i))
                } else {
                    Self::parse_str(&n.to_string())
                }
            }
            other => Err(Error::Parse(format!("expected scalar, got {other}"))),
        }
    }

    /// `self <= other`, with `tol` slack in float mode.
    fn le_tol(&self, other: &Self, tol: Tolerance) -> bool;

    fn eq_tol(&self, other: &Self, tol: Tolerance) -> bool {
        self.le_tol(other, tol) && other.le_tol(self, tol)
    }

    fn is_nonneg(&self, tol: Tolerance) -> bool {
        Self::zero().le_tol(self, tol)
    }

    fn max_of(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    fn min_of(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn parse_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| bad_scalar(s))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_scalar(s))?;
            if d == 0.0 {
                return Err(bad_scalar(s));
            }
            return Ok(n / d);
        }
        let v: f64 = s.parse().map_err(|_| bad_scalar(s))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad_scalar(s))
        }
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn le_tol(&self, other: &Self, tol: Tolerance) -> bool {
        *self <= *other + tol.0
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn parse_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad_scalar(s))?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad_scalar(s))?;
            if d.is_zero() {
                return Err(bad_scalar(s));
            }
            return Ok(BigRational::new(n, d));
        }
        if let Ok(i) = BigInt::from_str(s) {
            return Ok(BigRational::from_integer(i));
        }
        parse_decimal(s).ok_or_else(|| bad_scalar(s))
    }

    fn to_json(&self) -> Value {
        Value::String(rational_string(self))
    }

    fn le_tol(&self, other: &Self, _tol: Tolerance) -> bool {
        self <= other
    }
}

/// `"p/q"` in lowest terms, or `"p"` for integers.
pub fn rational_string(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact value of a finite decimal literal such as `-1.25` or `3e-2`.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits == "-" || digits == "+" || digits.is_empty() {
        return None;
    } else {
        digits
    };
    let numer = BigInt::from_str(&digits).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

fn bad_scalar(s: &str) -> Error {
    Error::Parse(format!("invalid scalar literal {s:?}"))
}
