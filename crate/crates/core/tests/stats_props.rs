use epr_coupling::model::{ConnectionVector, OutcomeVector};
use epr_coupling::scalar::Scalar;
use epr_coupling::stats::{
    chsh_satisfied, compatible, enumerate_e0, noforcing_counterexample, qm_compliant, s_pair, s_pair_closed_form,
    s_pair_connection, s_pair_outcome, tsirelson_satisfied, CorrelationQuad, QmClass,
};
use proptest::prelude::*;

fn half_unit() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=64).prop_flat_map(|d| (0..=d / 2).prop_map(move |n| (n, d)))
}

fn quad() -> impl Strategy<Value = [(i64, i64); 4]> {
    [half_unit(), half_unit(), half_unit(), half_unit()]
}

// Brute force over sign patterns in f64; parity = number of plus signs mod 2.
fn oracle_pair(r: [f64; 4]) -> (f64, f64) {
    let mut best = [f64::NEG_INFINITY; 2];
    for pattern in 0u32..16 {
        let sum: f64 = (0..4).map(|k| if pattern >> k & 1 == 1 { r[k] } else { -r[k] }).sum();
        let slot = (pattern.count_ones() % 2) as usize;
        best[slot] = best[slot].max(sum / 4.0);
    }
    (best[0], best[1])
}

fn as_f64(v: [(i64, i64); 4]) -> [f64; 4] {
    v.map(|(n, d)| n as f64 / d as f64)
}

fn oracle_compatible(p: [f64; 4], e: [f64; 4]) -> Option<bool> {
    let (p0, p1) = oracle_pair(p.map(|x| 4.0 * x - 1.0));
    let (e0, e1) = oracle_pair(e.map(|x| 1.0 - 4.0 * x));
    let slack = (1.5 - e0 - p1).min(1.5 - e1 - p0);
    // Too close to call in floating point.
    (slack.abs() > 1e-12).then_some(slack > 0.0)
}

proptest! {
    #[test]
    fn s_pair_matches_enumeration(p in quad()) {
        let outcome = OutcomeVector::from_ratios(p).unwrap();
        let exact = s_pair_outcome(&outcome);
        let (s0, s1) = oracle_pair(as_f64(p).map(|x| 4.0 * x - 1.0));
        prop_assert!((exact.s0.to_f64() - s0).abs() < 1e-12);
        prop_assert!((exact.s1.to_f64() - s1).abs() < 1e-12);
        prop_assert_eq!(s_pair_closed_form(&CorrelationQuad::from_outcome(&outcome)), exact);
    }

    #[test]
    fn s_pair_in_triangle(p in quad()) {
        prop_assert!(s_pair_outcome(&OutcomeVector::from_ratios(p).unwrap()).in_triangle());
        prop_assert!(s_pair_connection(&ConnectionVector::from_ratios(p).unwrap()).in_triangle());
    }

    #[test]
    fn s_pair_symmetries(p in quad(), perm in Just([0usize, 1, 2, 3]).prop_shuffle(), flips in 0u32..16) {
        let r = CorrelationQuad::from_outcome(&OutcomeVector::from_ratios(p).unwrap());
        let base = s_pair(&r);
        let permuted = CorrelationQuad::new(std::array::from_fn(|k| r.components()[perm[k]].clone())).unwrap();
        prop_assert_eq!(s_pair(&permuted), base.clone());
        let flipped = CorrelationQuad::new(std::array::from_fn(|k| {
            let x = r.components()[k].clone();
            if flips >> k & 1 == 1 { -x } else { x }
        })).unwrap();
        let expected = if flips.count_ones() % 2 == 0 { base.clone() } else { epr_coupling::stats::SPair::new(base.s1, base.s0) };
        prop_assert_eq!(s_pair(&flipped), expected);
    }

    #[test]
    fn compatibility_matches_oracle(p in quad(), e in quad()) {
        let verdict = compatible(&OutcomeVector::from_ratios(p).unwrap(), &ConnectionVector::from_ratios(e).unwrap());
        if let Some(expected) = oracle_compatible(as_f64(p), as_f64(e)) {
            prop_assert_eq!(verdict, expected);
        }
    }

    #[test]
    fn null_connection_is_chsh(p in quad()) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        prop_assert_eq!(compatible(&p, &ConnectionVector::null()), chsh_satisfied(&p));
    }

    #[test]
    fn tsirelson_connection_matches_bound(p in quad()) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        prop_assert_eq!(compatible(&p, &ConnectionVector::tsirelson()), tsirelson_satisfied(&p));
    }

    #[test]
    fn region_chain(p in quad()) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        if chsh_satisfied(&p) {
            prop_assert!(qm_compliant(&p).is_compliant());
        }
        if qm_compliant(&p).is_compliant() {
            prop_assert!(tsirelson_satisfied(&p));
        }
    }

    #[test]
    fn null_class_acts_like_null(p in quad()) {
        let p = OutcomeVector::from_ratios(p).unwrap();
        let expected = compatible(&p, &ConnectionVector::null());
        for e in enumerate_e0() {
            prop_assert_eq!(compatible(&p, &e), expected);
        }
    }

    #[test]
    fn noforcing_witness_is_valid(e in quad()) {
        let e = ConnectionVector::from_ratios(e).unwrap();
        prop_assume!(s_pair_connection(&e).s0 != Scalar::one());
        let p = noforcing_counterexample(&e).unwrap();
        prop_assert!(compatible(&p, &e));
        prop_assert_eq!(qm_compliant(&p), QmClass::Outside);
    }
}
