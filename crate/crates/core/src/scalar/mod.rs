//! Exact and approximate scalars.
//!
//! Exact scalars live in ℚ(√2), which holds every constant the theory needs
//! (the Tsirelson bounds `(1 ± √2)/2`, the connection `(√2 − 1)/8`, the
//! cosines of multiples of π/4). Approximate scalars are plain `f64` values
//! compared with a tolerance, used only where inputs leave ℚ(√2).

mod parse;
mod quadratic;
mod rational;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use quadratic::QSqrt2;
pub use rational::Rational;

/// Tolerance used by approximate comparisons unless one is given explicitly.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("cannot compare an exact scalar with an approximate one without conversion")]
    MixedModes,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar `{0}`")]
    Parse(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(QSqrt2),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(QSqrt2::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(QSqrt2::one())
    }

    pub fn half() -> Self {
        Scalar::ratio(1, 2)
    }

    pub fn integer(n: i64) -> Self {
        Scalar::Exact(QSqrt2::from(n))
    }

    /// The exact rational `numer / denom`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Scalar::Exact(QSqrt2::rational(Rational::new(numer, denom)))
    }

    pub fn sqrt2() -> Self {
        Scalar::Exact(QSqrt2::sqrt2())
    }

    /// `a + b√2` for rational `a`, `b`.
    pub fn quadratic(a: Rational, b: Rational) -> Self {
        Scalar::Exact(QSqrt2::new(a, b))
    }

    pub fn approx(v: f64) -> Self {
        Scalar::Approx(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// The exact value, if this scalar is exact.
    pub fn as_exact(&self) -> Option<&QSqrt2> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    /// The rational value, if this scalar is exact and has no √2 part.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(q) if q.is_rational() => Some(q.rational_part()),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64(),
            Scalar::Approx(v) => *v,
        }
    }

    /// Explicit conversion to approximate mode.
    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(self.to_f64())
    }

    /// Sign, exact in exact mode; within [`DEFAULT_TOLERANCE`] of zero counts
    /// as zero in approximate mode.
    pub fn signum(&self) -> Ordering {
        self.signum_tol(DEFAULT_TOLERANCE)
    }

    pub fn signum_tol(&self, tol: f64) -> Ordering {
        match self {
            Scalar::Exact(q) => q.signum(),
            Scalar::Approx(v) => {
                if v.abs() <= tol {
                    Ordering::Equal
                } else if *v > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Approx(v) => Scalar::Approx(v.abs()),
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a.checked_div(b)?)),
            _ => {
                let d = rhs.to_f64();
                if d == 0.0 {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Approx(self.to_f64() / d))
                }
            }
        }
    }

    /// Ordering of two scalars of the same mode, using [`DEFAULT_TOLERANCE`]
    /// for approximate ones.
    pub fn compare(&self, other: &Scalar) -> Result<Ordering, ScalarError> {
        self.compare_tol(other, DEFAULT_TOLERANCE)
    }

    pub fn compare_tol(&self, other: &Scalar, tol: f64) -> Result<Ordering, ScalarError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(a.cmp(b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => {
                if (a - b).abs() <= tol {
                    Ok(Ordering::Equal)
                } else {
                    Ok(a.partial_cmp(b).unwrap_or(Ordering::Equal))
                }
            }
            _ => Err(ScalarError::MixedModes),
        }
    }

    /// Larger of two scalars; the sign of the difference decides, so mixed
    /// modes are allowed here (the result keeps its own mode).
    pub fn max_of(self, other: Scalar) -> Scalar {
        if (&other - &self).signum_tol(0.0) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn min_of(self, other: Scalar) -> Scalar {
        if (&other - &self).signum_tol(0.0) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::integer(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Exact(QSqrt2::rational(r))
    }
}

impl From<QSqrt2> for Scalar {
    fn from(q: QSqrt2) -> Self {
        Scalar::Exact(q)
    }
}

// Arithmetic stays exact when both operands are exact; any approximate
// operand makes the result approximate.
macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Approx(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self) $op (&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self) $op rhs
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op (&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        self.checked_div(rhs).expect("scalar division by zero")
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl<'a> Div<&'a Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &'a Scalar) -> Scalar {
        &self / rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Approx(v) => Scalar::Approx(-v),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{}", q),
            // `{:?}` always keeps a decimal point or exponent, so the text
            // parses back as an approximate scalar.
            Scalar::Approx(v) => write!(f, "{:?}", v),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;

    /// Parses `1/4`, `-3`, `(3-1*sqrt2)/2`, `sqrt(2)/2`, and decimal
    /// literals. Any decimal literal makes the whole value approximate.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse_scalar(s)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(Scalar::one().compare(&Scalar::sqrt2()), Ok(Ordering::Less));
        assert_eq!(Scalar::zero().compare(&Scalar::zero()), Ok(Ordering::Equal));
        assert_eq!(s("(3-sqrt2)/2").compare(&Scalar::one()), Ok(Ordering::Less));
    }

    #[test]
    fn mixed_modes_rejected() {
        assert_eq!(Scalar::one().compare(&Scalar::approx(1.0)), Err(ScalarError::MixedModes));
        assert_eq!(Scalar::one().to_approx().compare(&Scalar::approx(1.0 + 1e-12)), Ok(Ordering::Equal));
    }

    #[test]
    fn approximate_tolerance() {
        let a = Scalar::approx(0.5);
        assert_eq!(a.compare(&Scalar::approx(0.5 + 5e-10)), Ok(Ordering::Equal));
        assert_eq!(a.compare(&Scalar::approx(0.5 + 5e-9)), Ok(Ordering::Less));
        assert_eq!(a.compare_tol(&Scalar::approx(0.5 + 5e-9), 1e-8), Ok(Ordering::Equal));
    }

    #[test]
    fn arithmetic_promotes_to_approx() {
        let x = &Scalar::half() + &Scalar::approx(0.25);
        assert_eq!(x, Scalar::approx(0.75));
        let y = &Scalar::half() + &Scalar::ratio(1, 4);
        assert_eq!(y, Scalar::ratio(3, 4));
    }

    #[test]
    fn display_round_trip() {
        for text in ["1/4", "0", "(3-1*sqrt2)/2", "-5/7", "1*sqrt2/2", "(1+1*sqrt2)"] {
            let v = s(text);
            assert_eq!(v.to_string(), text);
            assert_eq!(s(&v.to_string()), v);
        }
        assert_eq!(s("0.25"), Scalar::approx(0.25));
        assert_eq!(Scalar::approx(1.0).to_string(), "1.0");
    }

    #[test]
    fn division() {
        assert_eq!(Scalar::one().checked_div(&Scalar::zero()), Err(ScalarError::DivisionByZero));
        assert_eq!(&Scalar::one() / &Scalar::sqrt2(), s("sqrt2/2"));
    }
}
