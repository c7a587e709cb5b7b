//! Feasibility of the coupling polytope.
//!
//! Every marginal probability `Pr[all of S = +1]` becomes one equality row over
//! the 256 coupling columns: the coefficient of a column is 1 exactly when its
//! assignment puts every variable of `S` at `+1`. The empty subset gives the
//! all-ones normalization row. A coupling exists iff the rows admit a
//! nonnegative solution, which the exact simplex in [`simplex`] decides.

pub mod simplex;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{vars_of_mask, CouplingTable, MarginalSpec, ModelError, OutcomeVector, VariableId};
use crate::scalar::{QSqrt2, Rational, Scalar};
use simplex::{LpField, Outcome, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("conflicting values for Pr[{subset} all +1]: {first} vs {second}")]
    Conflict { subset: String, first: String, second: String },
    #[error("the exact solver needs exact inputs, got approximate value {0}")]
    InexactInput(String),
    #[error("no coupling reproduces the given marginals")]
    Infeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `Σ_{columns ⊇ mask} Q = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub mask: u8,
    pub rhs: Scalar,
}

impl ConstraintRow {
    pub fn variables(&self) -> Vec<VariableId> {
        vars_of_mask(self.mask)
    }

    /// Coefficient of coupling column `column` in this row.
    pub fn covers(&self, column: usize) -> bool {
        column as u8 & self.mask == self.mask
    }

    /// The row as a 256-entry 0/1 vector.
    pub fn coefficients(&self) -> Vec<bool> {
        (0..CouplingTable::SIZE).map(|c| self.covers(c)).collect()
    }

    /// Number of columns with coefficient 1.
    pub fn ones(&self) -> usize {
        1 << (8 - self.mask.count_ones())
    }
}

impl fmt::Display for ConstraintRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.variables().iter().map(|v| v.name()).collect();
        write!(f, "Pr[{} all +1] = {}", names.join(","), self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Objective {
    /// One coefficient per coupling column.
    Coupling(Vec<Scalar>),
    /// Coefficients on `(p11, p12, p21, p22)` read off the coupling.
    Outcome([Scalar; 4]),
}

impl Objective {
    fn column_costs(&self) -> Vec<Scalar> {
        match self {
            Objective::Coupling(c) => c.clone(),
            Objective::Outcome(d) => {
                let masks: [u8; 4] = std::array::from_fn(|k| {
                    let (a, b) = OutcomeVector::pair_variables(k);
                    a.bit() | b.bit()
                });
                (0..CouplingTable::SIZE)
                    .map(|col| {
                        masks
                            .iter()
                            .zip(d)
                            .filter(|(m, _)| col as u8 & **m == **m)
                            .fold(Scalar::zero(), |acc, (_, dk)| &acc + dk)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    rows: Vec<ConstraintRow>,
    objective: Option<Objective>,
}

/// Deduplicates the rows of all specs, normalization row first, the rest in
/// order of first appearance.
pub fn build_system(specs: &[MarginalSpec]) -> Result<ConstraintSystem, LpError> {
    let mut rows = vec![ConstraintRow { mask: 0, rhs: Scalar::one() }];
    let mut seen: HashMap<u8, usize> = HashMap::from([(0, 0)]);
    for spec in specs {
        for (mask, value) in spec.rows() {
            match seen.get(&mask) {
                Some(&i) => {
                    let old = &rows[i].rhs;
                    if !(old - value).is_zero() {
                        let names: Vec<_> = vars_of_mask(mask).iter().map(|v| v.name()).collect();
                        return Err(LpError::Conflict {
                            subset: names.join(","),
                            first: old.to_string(),
                            second: value.to_string(),
                        });
                    }
                }
                None => {
                    seen.insert(mask, rows.len());
                    rows.push(ConstraintRow { mask, rhs: value.clone() });
                }
            }
        }
    }
    Ok(ConstraintSystem { rows, objective: None })
}

impl ConstraintSystem {
    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    /// Appends the four rows `Pr[A_ij = B_ij = +1] = p_ij`.
    pub fn with_outcome(mut self, p: &OutcomeVector) -> Self {
        for (k, pij) in p.components().iter().enumerate() {
            let (a, b) = OutcomeVector::pair_variables(k);
            self.rows.push(ConstraintRow { mask: a.bit() | b.bit(), rhs: pij.clone() });
        }
        self
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = Some(objective);
        self
    }

    /// Whether the table reproduces every row exactly.
    pub fn is_satisfied_by(&self, table: &CouplingTable) -> bool {
        self.rows.iter().all(|row| (&table.prob_mask(row.mask) - &row.rhs).is_zero())
    }

    /// Maximizes the objective (zero if none) over all couplings satisfying
    /// the rows. `None` when no coupling does.
    pub fn solve(&self) -> Result<Option<(Scalar, CouplingTable)>, LpError> {
        let costs = match &self.objective {
            Some(o) => o.column_costs(),
            None => vec![Scalar::zero(); CouplingTable::SIZE],
        };
        if costs.len() != CouplingTable::SIZE {
            return Err(ModelError::TableLength { expected: CouplingTable::SIZE, got: costs.len() }.into());
        }
        let inputs = self.rows.iter().map(|r| &r.rhs).chain(costs.iter());
        let mut rational = true;
        for v in inputs {
            match v {
                Scalar::Approx(x) => return Err(LpError::InexactInput(format!("{x:?}"))),
                Scalar::Exact(q) => rational &= q.is_rational(),
            }
        }
        if rational {
            self.solve_in::<Rational>(&costs)
        } else {
            self.solve_in::<QSqrt2>(&costs)
        }
    }

    fn solve_in<F: LpField>(&self, costs: &[Scalar]) -> Result<Option<(Scalar, CouplingTable)>, LpError> {
        let convert = |s: &Scalar| F::from_scalar(s).expect("field chosen to hold every input");
        let problem = Problem {
            a: self
                .rows
                .iter()
                .map(|row| (0..CouplingTable::SIZE).map(|c| if row.covers(c) { F::one() } else { F::zero() }).collect())
                .collect(),
            b: self.rows.iter().map(|row| convert(&row.rhs)).collect(),
            c: costs.iter().map(convert).collect(),
        };
        match simplex::solve(&problem) {
            Outcome::Infeasible => Ok(None),
            Outcome::Unbounded => unreachable!("the coupling polytope is bounded"),
            Outcome::Optimal { x, value } => {
                let table = CouplingTable::new(x.iter().map(F::to_scalar).collect())?;
                Ok(Some((value.to_scalar(), table)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness: Option<CouplingTable>,
}

/// Decides whether some coupling has the given marginals and, if `p` is
/// given, also the observable pair probabilities `p`.
pub fn feasible(specs: &[MarginalSpec], p: Option<&OutcomeVector>) -> Result<Feasibility, LpError> {
    let mut system = build_system(specs)?;
    if let Some(p) = p {
        system = system.with_outcome(p);
    }
    let witness = system.solve()?.map(|(_, table)| table);
    Ok(Feasibility { feasible: witness.is_some(), witness })
}

/// Whether `table` has every spec's full joint table as its marginal and, if
/// given, the outcome vector `p`.
pub fn witness_reproduces(specs: &[MarginalSpec], p: Option<&OutcomeVector>, table: &CouplingTable) -> bool {
    let same = |a: &[Scalar], b: &[Scalar]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).is_zero());
    specs.iter().all(|spec| same(&table.marginal_table(spec.variables()), &spec.full_table()))
        && p.is_none_or(|p| table.outcome_vector().is_ok_and(|q| same(q.components(), p.components())))
}

/// Maximum of `direction · p` over the outcome vectors of all couplings
/// consistent with `specs`, with a maximizing coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub value: Scalar,
    pub maximizer: OutcomeVector,
    pub witness: CouplingTable,
}

pub fn optimize_detailed(specs: &[MarginalSpec], direction: &[Scalar; 4]) -> Result<Support, LpError> {
    let system = build_system(specs)?.with_objective(Objective::Outcome(direction.clone()));
    let (value, witness) = system.solve()?.ok_or(LpError::Infeasible)?;
    let maximizer = witness.outcome_vector()?;
    Ok(Support { value, maximizer, witness })
}

pub fn optimize(specs: &[MarginalSpec], direction: &[Scalar; 4]) -> Result<Scalar, LpError> {
    optimize_detailed(specs, direction).map(|s| s.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{connection_marginals, outcome_marginals, ConnectionVector};
    use crate::stats::compatible;

    fn dir(v: [i64; 4]) -> [Scalar; 4] {
        v.map(Scalar::integer)
    }

    #[test]
    fn pair_row_has_64_ones() {
        let spec = MarginalSpec::pair(VariableId::A11, VariableId::B11, Scalar::ratio(1, 4)).unwrap();
        let system = build_system(&[spec]).unwrap();
        let row = system.rows().iter().find(|r| r.mask == VariableId::A11.bit() | VariableId::B11.bit()).unwrap();
        assert_eq!(row.coefficients().iter().filter(|&&b| b).count(), 64);
        assert_eq!(row.ones(), 64);
    }

    #[test]
    fn empty_marginal_is_normalization() {
        let system = build_system(&[]).unwrap();
        assert_eq!(system.rows().len(), 1);
        assert!(system.rows()[0].coefficients().iter().all(|&b| b));
        assert_eq!(system.rows()[0].rhs, Scalar::one());
    }

    #[test]
    fn four_marginal_gives_sixteen_rows() {
        use VariableId::*;
        let vars = vec![A11, A12, A21, A22];
        let spec = MarginalSpec::from_table(vars, vec![Scalar::ratio(1, 16); 16]).unwrap();
        let system = build_system(&[spec]).unwrap();
        assert_eq!(system.rows().len(), 16);
        let a11 = system.rows().iter().find(|r| r.mask == A11.bit()).unwrap();
        assert_eq!(a11.rhs, Scalar::half());
    }

    #[test]
    fn shared_rows_merge_and_conflicts_fail() {
        use VariableId::*;
        let a = MarginalSpec::pair(A11, B11, Scalar::ratio(1, 4)).unwrap();
        let b = MarginalSpec::pair(A11, A12, Scalar::ratio(1, 4)).unwrap();
        // normalization, A11, B11, A11B11, A12, A11A12
        assert_eq!(build_system(&[a.clone(), b]).unwrap().rows().len(), 6);
        let skew = MarginalSpec::from_all_plus(vec![A11], [(vec![A11], Scalar::ratio(1, 3))]).unwrap();
        assert!(matches!(build_system(&[a, skew]), Err(LpError::Conflict { .. })));
    }

    fn specs_for(p: &OutcomeVector, eps: &ConnectionVector) -> Vec<MarginalSpec> {
        let mut specs = outcome_marginals(p);
        specs.extend(connection_marginals(eps));
        specs
    }

    #[test]
    fn feasibility_examples() {
        let null = ConnectionVector::null();
        let flat = OutcomeVector::from_ratios([(1, 4); 4]).unwrap();
        let pr = OutcomeVector::from_ratios([(1, 2), (1, 2), (1, 2), (0, 1)]).unwrap();

        let specs = specs_for(&flat, &null);
        let f = feasible(&specs, None).unwrap();
        assert!(f.feasible);
        let w = f.witness.unwrap();
        assert!(build_system(&specs).unwrap().is_satisfied_by(&w));
        assert!(witness_reproduces(&specs, None, &w));
        assert_eq!(w.outcome_vector().unwrap(), flat);
        assert_eq!(w.connection_vector().unwrap(), null);

        let f = feasible(&specs_for(&pr, &null), None).unwrap();
        assert!(!f.feasible && f.witness.is_none());
    }

    #[test]
    fn singletons_alone_admit_every_outcome() {
        let specs: Vec<_> = VariableId::ALL.iter().map(|&v| MarginalSpec::uniform(v)).collect();
        for p in [[(1, 2), (1, 2), (1, 2), (0, 1)], [(0, 1); 4], [(1, 3), (1, 7), (1, 2), (0, 1)]] {
            let p = OutcomeVector::from_ratios(p).unwrap();
            let f = feasible(&specs, Some(&p)).unwrap();
            let w = f.witness.expect("product-style coupling exists");
            assert_eq!(w.outcome_vector().unwrap(), p);
            assert!(witness_reproduces(&specs, Some(&p), &w));
        }
    }

    #[test]
    fn support_values() {
        let null = connection_marginals(&ConnectionVector::null());
        assert_eq!(optimize(&null, &dir([1, 1, 1, -2])).unwrap(), Scalar::one());
        let tsirelson = connection_marginals(&ConnectionVector::tsirelson());
        let s = optimize_detailed(&tsirelson, &dir([1, 1, 1, -2])).unwrap();
        assert_eq!(s.value, "(1+sqrt2)/2".parse().unwrap());
        assert!(build_system(&tsirelson).unwrap().is_satisfied_by(&s.witness));
        assert_eq!(optimize(&null, &dir([0, 0, 0, 0])).unwrap(), Scalar::zero());
    }

    #[test]
    fn approximate_inputs_rejected() {
        let p = OutcomeVector::new([0.25, 0.25, 0.25, 0.25].map(Scalar::approx)).unwrap();
        assert!(matches!(feasible(&[], Some(&p)), Err(LpError::InexactInput(_))));
    }

    #[test]
    fn agrees_with_closed_form_on_corners() {
        let values = [(0, 1), (1, 4), (1, 2)];
        for &a in &values {
            for &b in &values {
                for &c in &values {
                    for &d in &values {
                        let p = OutcomeVector::from_ratios([a, b, c, d]).unwrap();
                        for eps in [ConnectionVector::null(), ConnectionVector::independent()] {
                            let lp = feasible(&connection_marginals(&eps), Some(&p)).unwrap().feasible;
                            assert_eq!(lp, compatible(&p, &eps), "p = {p}, eps = {eps}");
                        }
                    }
                }
            }
        }
    }
}
