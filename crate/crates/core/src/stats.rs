//! Correlation statistics and the closed-form criteria: the `s₀`/`s₁`
//! statistics, CHSH, Tsirelson and cosphericity tests, the compatibility
//! criterion for outcome and connection vectors, and the constructions
//! behind the no-forcing argument.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ConnectionVector, ModelError, OutcomeVector};
use crate::scalar::{Scalar, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("correlation {0} is outside [-1, 1]")]
    CorrelationOutOfRange(String),
    #[error("target (s0, s1) = ({s0}, {s1}) is outside the attainable triangle")]
    OutsideTriangle { s0: String, s1: String },
    #[error("parity {requested:?} cannot make the larger statistic of ({s0}, {s1})")]
    ParityMismatch { requested: Parity, s0: String, s1: String },
    #[error("connection vector {0} has s0 = 1; every compatible outcome vector satisfies CHSH")]
    ForcingConnection(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn s(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

fn le(a: &Scalar, b: &Scalar) -> bool {
    (a - b).signum() != Ordering::Greater
}

/// Four correlations, each in [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationQuad([Scalar; 4]);

impl CorrelationQuad {
    pub fn new(r: [Scalar; 4]) -> Result<Self, StatsError> {
        for x in &r {
            if !le(&Scalar::integer(-1), x) || !le(x, &Scalar::one()) {
                return Err(StatsError::CorrelationOutOfRange(x.to_string()));
            }
        }
        Ok(CorrelationQuad(r))
    }

    /// `r_ij = 4p_ij − 1`.
    pub fn from_outcome(p: &OutcomeVector) -> Self {
        CorrelationQuad(p.components().clone().map(|x| &(&x * &Scalar::integer(4)) - &Scalar::one()))
    }

    /// `r = 1 − 4ε`.
    pub fn from_connection(eps: &ConnectionVector) -> Self {
        CorrelationQuad(eps.components().clone().map(|x| &Scalar::one() - &(&x * &Scalar::integer(4))))
    }

    /// The outcome vector with these correlations, `p = (r + 1)/4`.
    pub fn to_outcome(&self) -> Result<OutcomeVector, StatsError> {
        Ok(OutcomeVector::new(self.0.clone().map(|r| &(&r + &Scalar::one()) / &Scalar::integer(4)))?)
    }

    /// The connection vector with these correlations, `ε = (1 − r)/4`.
    pub fn to_connection(&self) -> Result<ConnectionVector, StatsError> {
        Ok(ConnectionVector::new(self.0.clone().map(|r| &(&Scalar::one() - &r) / &Scalar::integer(4)))?)
    }

    pub fn components(&self) -> &[Scalar; 4] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// The pair `(s₀, s₁)` of maximal signed quarter-sums of four correlations,
/// over sign patterns with an even (`s₀`) or odd (`s₁`) number of plus signs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SPair {
    pub s0: Scalar,
    pub s1: Scalar,
}

impl SPair {
    pub fn new(s0: Scalar, s1: Scalar) -> Self {
        SPair { s0, s1 }
    }

    /// Inside the triangle with vertices (0,0), (1/2,1), (1,1/2):
    /// `s0 + s1 ≤ 3/2`, `s1 ≥ s0/2`, `s0 ≥ s1/2`.
    pub fn in_triangle(&self) -> bool {
        let (s0, s1) = (&self.s0, &self.s1);
        le(&(s0 + s1), &s(3, 2))
            && le(&(s0 * &Scalar::half()), s1)
            && le(&(s1 * &Scalar::half()), s0)
            && le(&Scalar::zero(), s0)
            && le(&Scalar::zero(), s1)
    }
}

/// `(s₀, s₁)` by maximizing over all sixteen sign patterns.
pub fn s_pair(r: &CorrelationQuad) -> SPair {
    let mut best: [Option<Scalar>; 2] = [None, None];
    for pattern in 0u32..16 {
        let sum =
            r.0.iter().enumerate().fold(
                Scalar::zero(),
                |acc, (k, x)| {
                    if pattern & (1 << k) != 0 {
                        &acc + x
                    } else {
                        &acc - x
                    }
                },
            );
        let quarter = &sum / &Scalar::integer(4);
        let slot = &mut best[(pattern.count_ones() % 2) as usize];
        *slot = Some(match slot.take() {
            None => quarter,
            Some(cur) => cur.max_of(quarter),
        });
    }
    let [s0, s1] = best.map(|b| b.expect("both parities occur"));
    SPair { s0, s1 }
}

/// `(s₀, s₁)` in closed form: the statistic whose parity matches the number
/// of positive correlations equals `¼Σ|r|`, the other is that minus
/// `½ min|r|`.
pub fn s_pair_closed_form(r: &CorrelationQuad) -> SPair {
    let abs: Vec<Scalar> = r.0.iter().map(Scalar::abs).collect();
    let total = abs.iter().fold(Scalar::zero(), |acc, x| &acc + x);
    let larger = &total / &Scalar::integer(4);
    let min = abs.iter().cloned().reduce(Scalar::min_of).expect("four components");
    let smaller = &larger - &(&min * &Scalar::half());
    let positives = r.0.iter().filter(|x| x.signum_tol(0.0) == Ordering::Greater).count();
    if positives % 2 == 0 {
        SPair { s0: larger, s1: smaller }
    } else {
        SPair { s0: smaller, s1: larger }
    }
}

pub fn s_pair_outcome(p: &OutcomeVector) -> SPair {
    s_pair(&CorrelationQuad::from_outcome(p))
}

pub fn s_pair_connection(eps: &ConnectionVector) -> SPair {
    s_pair(&CorrelationQuad::from_connection(eps))
}

/// The four CHSH expressions `p11 + p12 + p21 + p22 − 2p_ij`, in the order
/// `ij = 11, 12, 21, 22`.
pub fn chsh_expressions(p: &OutcomeVector) -> [Scalar; 4] {
    let c = p.components();
    let total = c.iter().fold(Scalar::zero(), |acc, x| &acc + x);
    std::array::from_fn(|k| &total - &(&c[k] * &Scalar::integer(2)))
}

fn all_within(p: &OutcomeVector, lower: &Scalar, upper: &Scalar) -> bool {
    chsh_expressions(p).iter().all(|e| le(lower, e) && le(e, upper))
}

/// `0 ≤ Σp − 2p_ij ≤ 1` for all `i, j`.
pub fn chsh_satisfied(p: &OutcomeVector) -> bool {
    all_within(p, &Scalar::zero(), &Scalar::one())
}

/// `(1 − √2)/2`.
pub fn tsirelson_lower() -> Scalar {
    &(&Scalar::one() - &Scalar::sqrt2()) / &Scalar::integer(2)
}

/// `(1 + √2)/2`.
pub fn tsirelson_upper() -> Scalar {
    &(&Scalar::one() + &Scalar::sqrt2()) / &Scalar::integer(2)
}

/// `(1 − √2)/2 ≤ Σp − 2p_ij ≤ (1 + √2)/2` for all `i, j`.
pub fn tsirelson_satisfied(p: &OutcomeVector) -> bool {
    all_within(p, &tsirelson_lower(), &tsirelson_upper())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QmClass {
    Inside,
    Boundary,
    Outside,
}

impl QmClass {
    /// Boundary points are QM-compliant.
    pub fn is_compliant(self) -> bool {
        self != QmClass::Outside
    }
}

/// Classifies `p` against the cosphericity inequality
/// `|r11 r12 − r21 r22| ≤ √(1−r11²)√(1−r12²) + √(1−r21²)√(1−r22²)`.
///
/// Exact inputs are decided exactly: with `L` the left side and `X`, `Y` the
/// squared products on the right, `L ≤ √X + √Y` iff `D = L² − X − Y ≤ 0` or
/// `D² ≤ 4XY`, and every quantity stays in ℚ(√2).
pub fn qm_compliant(p: &OutcomeVector) -> QmClass {
    qm_compliant_tol(p, DEFAULT_TOLERANCE)
}

pub fn qm_compliant_tol(p: &OutcomeVector, tol: f64) -> QmClass {
    let r = CorrelationQuad::from_outcome(p);
    if p.is_exact() {
        qm_exact(&r)
    } else {
        qm_approx(&r, tol)
    }
}

fn qm_exact(r: &CorrelationQuad) -> QmClass {
    let [r11, r12, r21, r22] = &r.0;
    let one = Scalar::one();
    let lhs = (&(r11 * r12) - &(r21 * r22)).abs();
    let x = &(&one - &(r11 * r11)) * &(&one - &(r12 * r12));
    let y = &(&one - &(r21 * r21)) * &(&one - &(r22 * r22));
    let d = &(&(&lhs * &lhs) - &x) - &y;
    match d.signum() {
        Ordering::Less => QmClass::Inside,
        Ordering::Equal => {
            if (&x * &y).is_zero() {
                QmClass::Boundary
            } else {
                QmClass::Inside
            }
        }
        Ordering::Greater => match (&(&d * &d) - &(&(&x * &y) * &Scalar::integer(4))).signum() {
            Ordering::Less => QmClass::Inside,
            Ordering::Equal => QmClass::Boundary,
            Ordering::Greater => QmClass::Outside,
        },
    }
}

fn qm_approx(r: &CorrelationQuad, tol: f64) -> QmClass {
    let [r11, r12, r21, r22] = r.0.clone().map(|x| x.to_f64());
    let lhs = (r11 * r12 - r21 * r22).abs();
    let root = |a: f64, b: f64| ((1.0 - a * a).max(0.0) * (1.0 - b * b).max(0.0)).sqrt();
    let rhs = root(r11, r12) + root(r21, r22);
    let diff = lhs - rhs;
    if diff.abs() <= tol {
        QmClass::Boundary
    } else if diff < 0.0 {
        QmClass::Inside
    } else {
        QmClass::Outside
    }
}

/// `p` and `ε` can be embedded in one coupling iff
/// `s₀(ε) + s₁(p) ≤ 3/2` and `s₁(ε) + s₀(p) ≤ 3/2`.
pub fn compatible(p: &OutcomeVector, eps: &ConnectionVector) -> bool {
    compatible_from_pairs(&s_pair_outcome(p), &s_pair_connection(eps))
}

pub fn compatible_from_pairs(sp: &SPair, se: &SPair) -> bool {
    let limit = s(3, 2);
    le(&(&se.s0 + &sp.s1), &limit) && le(&(&se.s1 + &sp.s0), &limit)
}

/// The connection vectors with `s₀ = 1`: the null vector and the seven
/// vectors with two or four of its zeros replaced by 1/2.
pub fn enumerate_e0() -> Vec<ConnectionVector> {
    (0u32..16)
        .filter(|m| m.count_ones() % 2 == 0)
        .map(|m| {
            ConnectionVector::new(std::array::from_fn(
                |k| if m & (1 << k) != 0 { Scalar::half() } else { Scalar::zero() },
            ))
            .expect("components are 0 or 1/2")
        })
        .collect()
}

/// Correlations `(t, t, t, σu)` realizing `target`, where `M`, `m` are the
/// larger and smaller statistics, `t = 2(M + m)/3`, `u = 2(M − m)`, and `σ`
/// makes the number of positive components even (`s₀` larger) or odd
/// (`s₁` larger).
pub fn realize_s_pair(target: &SPair, parity: Parity) -> Result<CorrelationQuad, StatsError> {
    if !target.in_triangle() {
        return Err(StatsError::OutsideTriangle { s0: target.s0.to_string(), s1: target.s1.to_string() });
    }
    let order = (&target.s0 - &target.s1).signum();
    let consistent = match parity {
        Parity::Even => order != Ordering::Less,
        Parity::Odd => order != Ordering::Greater,
    };
    if !consistent {
        return Err(StatsError::ParityMismatch {
            requested: parity,
            s0: target.s0.to_string(),
            s1: target.s1.to_string(),
        });
    }
    let (big, small) = match parity {
        Parity::Even => (&target.s0, &target.s1),
        Parity::Odd => (&target.s1, &target.s0),
    };
    let t = &(&(big + small) * &Scalar::integer(2)) / &Scalar::integer(3);
    let u = &(big - small) * &Scalar::integer(2);
    // Three positive t's: the fourth component decides the parity.
    let fourth = match parity {
        Parity::Even => u,
        Parity::Odd => -u,
    };
    CorrelationQuad::new([t.clone(), t.clone(), t, fourth])
}

/// An outcome vector compatible with `eps` that violates cosphericity,
/// for any `eps` with `s₀(ε) < 1`.
///
/// The target `(s₀(p), s₁(p))` lies on the edge `s₀ + s₁ = 3/2` with
/// `s₀(p) < 1`, and satisfies `s₀(ε) + s₁(p) ≤ 3/2`, `s₁(ε) + s₀(p) ≤ 3/2`:
/// - `s₀(ε) ≤ 1/2`: `(1/2, 1)`;
/// - `s₁(ε) > 1/2`: `(3/2 − s₁(ε), s₁(ε))`;
/// - otherwise: `(s₀(ε), 3/2 − s₀(ε))`.
pub fn noforcing_counterexample(eps: &ConnectionVector) -> Result<OutcomeVector, StatsError> {
    let se = s_pair_connection(eps);
    if (&se.s0 - &Scalar::one()).signum() != Ordering::Less {
        return Err(StatsError::ForcingConnection(eps.to_string()));
    }
    let three_halves = s(3, 2);
    let target = if le(&se.s0, &Scalar::half()) {
        SPair::new(Scalar::half(), Scalar::one())
    } else if (&se.s1 - &Scalar::half()).signum() == Ordering::Greater {
        SPair::new(&three_halves - &se.s1, se.s1.clone())
    } else {
        SPair::new(se.s0.clone(), &three_halves - &se.s0)
    };
    let parity = if (&target.s0 - &target.s1).signum() == Ordering::Greater { Parity::Even } else { Parity::Odd };
    realize_s_pair(&target, parity)?.to_outcome()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    fn quad(v: [&str; 4]) -> CorrelationQuad {
        CorrelationQuad::new(v.map(sc)).unwrap()
    }

    fn outcome(v: [&str; 4]) -> OutcomeVector {
        OutcomeVector::new(v.map(sc)).unwrap()
    }

    fn angle_example() -> OutcomeVector {
        outcome(["(2-sqrt2)/8", "(2-sqrt2)/8", "(2-sqrt2)/8", "(2+sqrt2)/8"])
    }

    #[test]
    fn s_pair_examples() {
        assert_eq!(s_pair(&quad(["1", "1", "1", "1"])), SPair::new(sc("1"), sc("1/2")));
        assert_eq!(s_pair(&quad(["0", "0", "0", "0"])), SPair::new(sc("0"), sc("0")));
        let t = CorrelationQuad::from_connection(&ConnectionVector::tsirelson());
        assert_eq!(t.components()[0], sc("(3-sqrt2)/2"));
        assert_eq!(s_pair(&t), SPair::new(sc("(3-sqrt2)/2"), sc("(3-sqrt2)/4")));
    }

    #[test]
    fn closed_form_matches_examples() {
        for r in [["1", "1", "1", "1"], ["0", "0", "0", "0"], ["1", "-1/2", "1/3", "0"], ["-1", "-1", "1", "-1/4"]] {
            let q = quad(r);
            assert_eq!(s_pair(&q), s_pair_closed_form(&q));
        }
    }

    #[test]
    fn chsh_examples() {
        assert!(chsh_satisfied(&outcome(["1/4"; 4])));
        let pr = outcome(["1/2", "1/2", "1/2", "0"]);
        assert!(!chsh_satisfied(&pr));
        assert_eq!(chsh_expressions(&pr)[3], sc("3/2"));
        let ex = angle_example();
        assert!(!chsh_satisfied(&ex));
        assert_eq!(chsh_expressions(&ex)[3], sc("(1-sqrt2)/2"));
    }

    #[test]
    fn tsirelson_examples() {
        assert!(tsirelson_satisfied(&angle_example()));
        assert!(!tsirelson_satisfied(&outcome(["1/2", "1/2", "1/2", "0"])));
        assert!(tsirelson_satisfied(&outcome(["1/4"; 4])));
    }

    #[test]
    fn cosphericity_examples() {
        assert_eq!(qm_compliant(&outcome(["1/4"; 4])), QmClass::Inside);
        assert_eq!(qm_compliant(&outcome(["1/2", "1/2", "1/2", "0"])), QmClass::Outside);
        assert_eq!(qm_compliant(&angle_example()), QmClass::Boundary);
        // same point in approximate mode
        let approx = OutcomeVector::new(angle_example().components().clone().map(|x| x.to_approx())).unwrap();
        assert_eq!(qm_compliant(&approx), QmClass::Boundary);
    }

    #[test]
    fn compatibility_examples() {
        let pr = outcome(["1/2", "1/2", "1/2", "0"]);
        assert!(compatible(&pr, &ConnectionVector::independent()));
        assert!(!compatible(&pr, &ConnectionVector::null()));
        assert!(compatible(&outcome(["1/4"; 4]), &ConnectionVector::null()));
    }

    #[test]
    fn e0_examples() {
        let e0 = enumerate_e0();
        assert_eq!(e0.len(), 8);
        assert!(e0.contains(&ConnectionVector::null()));
        assert!(e0.contains(&ConnectionVector::new(std::array::from_fn(|_| Scalar::half())).unwrap()));
        for eps in &e0 {
            assert_eq!(s_pair_connection(eps), SPair::new(sc("1"), sc("1/2")));
        }
    }

    #[test]
    fn realize_examples() {
        let r = realize_s_pair(&SPair::new(sc("1/2"), sc("1")), Parity::Odd).unwrap();
        assert_eq!(r, quad(["1", "1", "1", "-1"]));
        assert_eq!(r.to_outcome().unwrap(), outcome(["1/2", "1/2", "1/2", "0"]));
        let r = realize_s_pair(&SPair::new(sc("1"), sc("1/2")), Parity::Even).unwrap();
        assert_eq!(r, quad(["1", "1", "1", "1"]));
        let r = realize_s_pair(&SPair::new(sc("0"), sc("0")), Parity::Even).unwrap();
        assert_eq!(r, quad(["0", "0", "0", "0"]));
    }

    #[test]
    fn realize_errors() {
        assert!(matches!(
            realize_s_pair(&SPair::new(sc("1"), sc("1")), Parity::Even),
            Err(StatsError::OutsideTriangle { .. })
        ));
        assert!(matches!(
            realize_s_pair(&SPair::new(sc("1/2"), sc("1/8")), Parity::Even),
            Err(StatsError::OutsideTriangle { .. })
        ));
        assert!(matches!(
            realize_s_pair(&SPair::new(sc("1/2"), sc("1")), Parity::Even),
            Err(StatsError::ParityMismatch { .. })
        ));
    }

    #[test]
    fn realize_on_triangle_edge() {
        // m = M/2 exactly: u = t
        let r = realize_s_pair(&SPair::new(sc("1/2"), sc("1/4")), Parity::Even).unwrap();
        assert_eq!(r, quad(["1/2", "1/2", "1/2", "1/2"]));
        assert_eq!(s_pair(&r), SPair::new(sc("1/2"), sc("1/4")));
    }

    #[test]
    fn noforcing_examples() {
        let p = noforcing_counterexample(&ConnectionVector::independent()).unwrap();
        assert_eq!(p, outcome(["1/2", "1/2", "1/2", "0"]));

        let eps_t = ConnectionVector::tsirelson();
        let p = noforcing_counterexample(&eps_t).unwrap();
        assert_eq!(s_pair_outcome(&p), SPair::new(sc("(3-sqrt2)/2"), sc("sqrt2/2")));
        assert!(compatible(&p, &eps_t));
        assert_eq!(qm_compliant(&p), QmClass::Outside);

        let eps = ConnectionVector::from_ratios([(0, 1), (0, 1), (0, 1), (1, 8)]).unwrap();
        assert_eq!(s_pair_connection(&eps).s0, sc("7/8"));
        let p = noforcing_counterexample(&eps).unwrap();
        assert!(compatible(&p, &eps));
        assert_eq!(qm_compliant(&p), QmClass::Outside);

        assert!(matches!(noforcing_counterexample(&ConnectionVector::null()), Err(StatsError::ForcingConnection(_))));
    }

    #[test]
    fn odd_statistic_branch_when_s1_exceeds_half() {
        // s0(ε) in (1/2, 1) and s1(ε) > 1/2
        let eps = ConnectionVector::from_ratios([(0, 1), (1, 2), (1, 16), (0, 1)]).unwrap();
        let se = s_pair_connection(&eps);
        assert!(le(&sc("1/2"), &se.s0) && (&se.s0 - &sc("1")).signum() == Ordering::Less);
        assert_eq!((&se.s1 - &sc("1/2")).signum(), Ordering::Greater);
        let p = noforcing_counterexample(&eps).unwrap();
        assert_eq!(s_pair_outcome(&p).s1, se.s1);
        assert!(compatible(&p, &eps));
        assert_eq!(qm_compliant(&p), QmClass::Outside);
    }
}
