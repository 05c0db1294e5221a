//! Scalar arithmetic shared by every other module.
//!
//! A [`Scalar`] is either an exact big rational, always kept in lowest terms
//! with a positive denominator, or a 64-bit float. Exact values combine to
//! exact values; anything that touches a float becomes a float.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("malformed scalar literal {0:?}")]
    Malformed(String),
}

/// An exact rational or a float.
#[derive(Clone)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

/// Result of converting a scalar to `f64`; `saturated` is set when the exact
/// value lies outside the finite `f64` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatConversion {
    pub value: f64,
    pub saturated: bool,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Scalar::Exact(BigRational::from_integer(n))
    }

    /// Reduced exact value `num/den`.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self, NumericsError> {
        if den == 0 {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn from_big_ratio(num: BigInt, den: BigInt) -> Result<Self, NumericsError> {
        if den.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Scalar::Exact(BigRational::new(num, den)))
    }

    /// Shorthand for literals known to be valid; panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_ratio(num, den).expect("nonzero denominator")
    }

    pub fn float(value: f64) -> Self {
        Scalar::Float(value)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_f64_checked().value
    }

    pub fn to_f64_checked(&self) -> FloatConversion {
        match self {
            Scalar::Float(v) => FloatConversion {
                value: *v,
                saturated: false,
            },
            Scalar::Exact(r) => {
                let value = r.to_f64().unwrap_or_else(|| {
                    if r.is_negative() {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    }
                });
                FloatConversion {
                    value,
                    saturated: value.is_infinite(),
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_positive(),
            Scalar::Float(v) => *v > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(v) => *v < 0.0,
        }
    }

    /// True for exact values with denominator one.
    pub fn is_integer(&self) -> bool {
        matches!(self, Scalar::Exact(r) if r.is_integer())
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Scalar::Exact(r) if r.is_integer() => r.to_integer().to_i64(),
            _ => None,
        }
    }

    /// Bit length of the denominator; zero for floats.
    pub fn denominator_bits(&self) -> u64 {
        match self {
            Scalar::Exact(r) => r.denom().bits(),
            Scalar::Float(_) => 0,
        }
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, exp: i32) -> Result<Self, NumericsError> {
        match self {
            Scalar::Exact(r) => {
                if exp < 0 && r.is_zero() {
                    return Err(NumericsError::DivisionByZero);
                }
                Ok(Scalar::Exact(num_traits::pow::Pow::pow(r, exp)))
            }
            Scalar::Float(v) => Ok(Scalar::Float(v.powi(exp))),
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Self, NumericsError> {
        match (self, rhs) {
            (_, Scalar::Exact(d)) if d.is_zero() => Err(NumericsError::DivisionByZero),
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a / b)),
            (a, b) => Ok(Scalar::Float(a.to_f64() / b.to_f64())),
        }
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        Scalar::one().checked_div(self)
    }

    /// Numeric comparison; mixed backends compare as floats.
    pub fn cmp_value(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            (a, b) => a.to_f64().partial_cmp(&b.to_f64()),
        }
    }

    pub fn max_of<'a>(&'a self, other: &'a Scalar) -> &'a Scalar {
        if other.cmp_value(self) == Some(Ordering::Greater) {
            other
        } else {
            self
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_value(other)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => Scalar::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => Scalar::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

/// Panics on division by an exact zero; use [`Scalar::checked_div`] to
/// handle that case.
impl Div<&Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs).expect("division by exact zero")
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Div<&Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

/// Renders a float with 17 significant digits, enough to round-trip.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Exact values render as `a/b` (or `a` for integers), floats in scientific
/// notation.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(v) => f.write_str(&format_float(*v)),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(_) => write!(f, "Exact({self})"),
            Scalar::Float(_) => write!(f, "Float({self})"),
        }
    }
}

/// Parses `a/b`, a bare integer (both exact), or a decimal literal (float).
impl FromStr for Scalar {
    type Err = NumericsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        let malformed = || NumericsError::Malformed(s.to_string());
        if text.is_empty() {
            return Err(malformed());
        }
        if let Some((num, den)) = text.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| malformed())?;
            let den: BigInt = den.trim().parse().map_err(|_| malformed())?;
            return Scalar::from_big_ratio(num, den);
        }
        if let Ok(n) = text.parse::<BigInt>() {
            return Ok(Scalar::from_bigint(n));
        }
        match text {
            "inf" | "+inf" => return Ok(Scalar::Float(f64::INFINITY)),
            "-inf" => return Ok(Scalar::Float(f64::NEG_INFINITY)),
            "NaN" => return Ok(Scalar::Float(f64::NAN)),
            _ => {}
        }
        // Reject things like "infinity" or "nan" that f64::from_str would accept.
        if !text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        {
            return Err(malformed());
        }
        text.parse::<f64>().map(Scalar::Float).map_err(|_| malformed())
    }
}

/// Scales exact values onto a shared denominator: returns integer numerators
/// `a_i` and `D > 0` with `values[i] = a_i / D`. `None` if any value is a float.
pub fn common_denominator(values: &[Scalar]) -> Option<(Vec<BigInt>, BigInt)> {
    let mut den = BigInt::one();
    for v in values {
        let r = v.as_exact()?;
        if !r.denom().is_one() {
            den = num_integer::Integer::lcm(&den, r.denom());
        }
    }
    let nums = values
        .iter()
        .map(|v| {
            let r = v.as_exact().expect("checked above");
            r.numer() * (&den / r.denom())
        })
        .collect();
    Some((nums, den))
}
