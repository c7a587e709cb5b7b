use epr_coupling::lp::feasible;
use epr_coupling::model::{connection_marginals, ConnectionVector, OutcomeVector};
use epr_coupling::qm::{qm_outcomes, Angle, Settings};
use epr_coupling::regions::{membership_grid, Slice};
use epr_coupling::scalar::Scalar;
use epr_coupling::stats::{compatible, qm_compliant};
use proptest::prelude::*;

fn half_unit() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=16).prop_flat_map(|d| (0..=d / 2).prop_map(move |n| (n, d)))
}

fn quad() -> impl Strategy<Value = [(i64, i64); 4]> {
    [half_unit(), half_unit(), half_unit(), half_unit()]
}

fn pi_angle() -> impl Strategy<Value = Angle> {
    (-8i64..=8).prop_map(|n| Angle::pi_fraction(n, 4))
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_agrees_with_closed_form(p in quad(), e in quad()) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        let e = ConnectionVector::from_ratios(e).unwrap();
        let result = feasible(&connection_marginals(&e), Some(&p)).unwrap();
        prop_assert_eq!(result.feasible, compatible(&p, &e));
    }

    #[test]
    fn fewer_constraints_never_shrink(p in quad(), e in quad(), keep in 0usize..4) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        let specs = connection_marginals(&ConnectionVector::from_ratios(e).unwrap());
        let full = feasible(&specs, Some(&p)).unwrap().feasible;
        let partial = feasible(&specs[..keep], Some(&p)).unwrap().feasible;
        prop_assert!(!full || partial);
    }
}

proptest! {
    #[test]
    fn planar_rotation_invariant(a in [pi_angle(), pi_angle(), pi_angle(), pi_angle()], offset in pi_angle()) {
        let settings = Settings::Planar(a);
        prop_assert_eq!(qm_outcomes(&settings.rotated(&offset)), qm_outcomes(&settings));
    }

    #[test]
    fn exact_planar_outcomes_are_compliant(a in [pi_angle(), pi_angle(), pi_angle(), pi_angle()]) {
        prop_assert!(qm_compliant(&qm_outcomes(&Settings::Planar(a))).is_compliant());
    }

    #[test]
    fn vector_outcomes_are_compliant(v in [unit_vector(), unit_vector(), unit_vector(), unit_vector()], turn in -3.0f64..3.0) {
        let settings = Settings::vectors(v).unwrap();
        let p = qm_outcomes(&settings);
        prop_assert!(qm_compliant(&p).is_compliant());
        let q = qm_outcomes(&settings.rotated(&Angle::Radians(turn)));
        for (x, y) in p.components().iter().zip(q.components()) {
            prop_assert!((x.to_f64() - y.to_f64()).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regions_nest_on_random_slices(a in 1i64..8, b in 1i64..8) {
        let slice = Slice::with_first_row(Scalar::ratio(a, 16), Scalar::ratio(b, 16)).unwrap();
        let grid = membership_grid(&slice, 21).unwrap();
        prop_assert!(grid.inclusion_holds());
    }
}
