use std::cmp::Ordering;

use epr_coupling::scalar::{QSqrt2, Rational, Scalar};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-200i64..=200, 1i64..=60).prop_map(|(n, d)| Rational::new(n, d))
}

fn quadratic() -> impl Strategy<Value = QSqrt2> {
    (rational(), rational()).prop_map(|(a, b)| QSqrt2::new(a, b))
}

// a + b√2 evaluated without the library's arithmetic.
fn float_of(q: &QSqrt2) -> f64 {
    let r =
        |x: &Rational| x.numer().to_string().parse::<f64>().unwrap() / x.denom().to_string().parse::<f64>().unwrap();
    r(q.rational_part()) + r(q.sqrt2_part()) * std::f64::consts::SQRT_2
}

proptest! {
    #[test]
    fn ordering_agrees_with_floats(x in quadratic(), y in quadratic()) {
        let (fx, fy) = (float_of(&x), float_of(&y));
        prop_assume!((fx - fy).abs() > 1e-9);
        prop_assert_eq!(x.cmp(&y), fx.partial_cmp(&fy).unwrap());
        prop_assert_eq!(Scalar::Exact(x).compare(&Scalar::Exact(y)).unwrap(), fx.partial_cmp(&fy).unwrap());
    }

    #[test]
    fn equal_values_compare_equal(x in quadratic()) {
        prop_assert_eq!(x.cmp(&x.clone()), Ordering::Equal);
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn field_axioms(x in quadratic(), y in quadratic(), z in quadratic()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.recip().unwrap(), QSqrt2::one());
        }
    }

    #[test]
    fn norm_is_product_with_conjugate(x in quadratic()) {
        prop_assert_eq!(&x * &x.conjugate(), QSqrt2::rational(x.norm()));
    }

    #[test]
    fn display_round_trips(x in quadratic()) {
        let s = Scalar::Exact(x);
        prop_assert_eq!(s.to_string().parse::<Scalar>().unwrap(), s);
    }

    #[test]
    fn large_values_stay_exact(n in 1i64..1_000_000, d in 1i64..1_000_000) {
        // Products far beyond i64 must still cancel exactly.
        let big = Rational::new(i64::MAX - n, d);
        let prod = &(&big * &big) * &big;
        prop_assert_eq!(&(&prod / &big) / &big, big);
    }
}

#[test]
fn mixed_modes_do_not_compare() {
    assert!(Scalar::half().compare(&Scalar::approx(0.5)).is_err());
    assert_eq!(Scalar::half().to_approx().compare(&Scalar::approx(0.5)), Ok(Ordering::Equal));
}
