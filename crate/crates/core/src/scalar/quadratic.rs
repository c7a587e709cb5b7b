//! The ordered field ℚ(√2).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_integer::Integer;

use super::{Rational, ScalarError};

/// `a + b·√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    a: Rational,
    b: Rational,
}

impl QSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        QSqrt2 { a, b: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn sqrt2() -> Self {
        QSqrt2 { a: Rational::zero(), b: Rational::one() }
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    /// Coefficient `b` of √2.
    pub fn sqrt2_part(&self) -> &Rational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of `a + b√2`.
    ///
    /// When `a` and `b` disagree in sign the magnitudes are compared through
    /// `a²` versus `2b²`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.signum();
        let sb = self.b.signum();
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (x, y) if x == y => x,
            (sa, _) => {
                let a2 = &self.a * &self.a;
                let two_b2 = &(&self.b * &self.b) * &Rational::from_integer(2);
                match a2.cmp(&two_b2) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// `a − b√2`.
    pub fn conjugate(&self) -> Self {
        QSqrt2 { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a² − 2b²`; zero only for zero.
    pub fn norm(&self) -> Rational {
        &(&self.a * &self.a) - &(&(&self.b * &self.b) * &Rational::from_integer(2))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if rhs.is_rational() {
            return Ok(QSqrt2 { a: self.a.checked_div(&rhs.a)?, b: self.b.checked_div(&rhs.a)? });
        }
        let n = rhs.norm();
        let num = self * &rhs.conjugate();
        Ok(QSqrt2 { a: num.a.checked_div(&n)?, b: num.b.checked_div(&n)? })
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        QSqrt2::one().checked_div(self)
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * std::f64::consts::SQRT_2
    }
}

impl From<Rational> for QSqrt2 {
    fn from(a: Rational) -> Self {
        QSqrt2::rational(a)
    }
}

impl From<i64> for QSqrt2 {
    fn from(n: i64) -> Self {
        QSqrt2::rational(Rational::from_integer(n))
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.is_rational() && other.is_rational() {
            return self.a.cmp(&other.a);
        }
        (self - other).signum()
    }
}

impl<'a> Add<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &'a QSqrt2) -> QSqrt2 {
        QSqrt2 { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }
}

impl<'a> Sub<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: &'a QSqrt2) -> QSqrt2 {
        QSqrt2 { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }
}

impl<'a> Mul<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &'a QSqrt2) -> QSqrt2 {
        if self.is_rational() && rhs.is_rational() {
            return QSqrt2::rational(&self.a * &rhs.a);
        }
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let bd = &self.b * &rhs.b;
        QSqrt2 { a: &(&self.a * &rhs.a) + &(&bd + &bd), b: &(&self.a * &rhs.b) + &(&self.b * &rhs.a) }
    }
}

impl<'a> Div<&'a QSqrt2> for &'a QSqrt2 {
    type Output = QSqrt2;
    fn div(self, rhs: &'a QSqrt2) -> QSqrt2 {
        self.checked_div(rhs).expect("division by zero in Q(sqrt2)")
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for QSqrt2 {
            type Output = QSqrt2;
            fn $method(self, rhs: QSqrt2) -> QSqrt2 {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $method(self, rhs: &'a QSqrt2) -> QSqrt2 {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 { a: -&self.a, b: -&self.b }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        -&self
    }
}

impl fmt::Display for QSqrt2 {
    /// Rational values print as `n` or `n/d`; others as `(A+B*sqrt2)/D`
    /// over a common denominator, e.g. `(3-1*sqrt2)/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let d = self.a.denom().lcm(&self.b.denom());
        let big_a = self.a.numer() * (&d / self.a.denom());
        let big_b = self.b.numer() * (&d / self.b.denom());
        let body = if self.a.is_zero() {
            format!("{}*sqrt2", big_b)
        } else if big_b.sign() == num_bigint::Sign::Minus {
            format!("({}-{}*sqrt2)", big_a, -big_b)
        } else {
            format!("({}+{}*sqrt2)", big_a, big_b)
        };
        if d == num_bigint::BigInt::from(1) {
            write!(f, "{}", body)
        } else {
            write!(f, "{}/{}", body, d)
        }
    }
}
