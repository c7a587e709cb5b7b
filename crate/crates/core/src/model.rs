//! Outcome vectors, connection vectors, coupling tables and marginal
//! specifications over the eight double-indexed spins.
//!
//! Coupling columns are indexed by a byte: bit `7 − k` holds the value of the
//! variable at canonical position `k` (so `A11` is the most significant bit),
//! with 1 meaning `+1` and 0 meaning `−1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what} = {value} is outside [0, 1/2]")]
    OutOfRange { what: String, value: String },
    #[error("assignment is missing variable {0}")]
    MissingVariable(VariableId),
    #[error("variable {0} appears more than once")]
    DuplicateVariable(VariableId),
    #[error("spin value {0} is not +1 or -1")]
    InvalidSpin(i8),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("marginal over {variables} assigns negative probability {value} to outcome {outcome}")]
    NegativeProbability { variables: String, outcome: String, value: String },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(String),
    #[error("missing probability for subset `{0}`")]
    MissingSubset(String),
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("invalid marginal specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// The eight spins in canonical coupling order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariableId {
    A11,
    B11,
    A12,
    B12,
    A21,
    B21,
    A22,
    B22,
}

impl VariableId {
    pub const ALL: [VariableId; 8] = [
        VariableId::A11,
        VariableId::B11,
        VariableId::A12,
        VariableId::B12,
        VariableId::A21,
        VariableId::B21,
        VariableId::A22,
        VariableId::B22,
    ];

    /// Position in canonical order, 0 for `A11` through 7 for `B22`.
    pub fn position(self) -> usize {
        self as usize
    }

    /// Bit of this variable in a coupling column index.
    pub fn bit(self) -> u8 {
        1 << (7 - self.position())
    }

    /// Alice's spin `A_ij`; `i`, `j` in {1, 2}.
    pub fn alice(i: usize, j: usize) -> VariableId {
        assert!((1..=2).contains(&i) && (1..=2).contains(&j));
        VariableId::ALL[4 * (i - 1) + 2 * (j - 1)]
    }

    /// Bob's spin `B_ij`; `i`, `j` in {1, 2}.
    pub fn bob(i: usize, j: usize) -> VariableId {
        assert!((1..=2).contains(&i) && (1..=2).contains(&j));
        VariableId::ALL[4 * (i - 1) + 2 * (j - 1) + 1]
    }

    pub fn name(self) -> &'static str {
        ["A11", "B11", "A12", "B12", "A21", "B21", "A22", "B22"][self.position()]
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariableId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        VariableId::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownVariable(s.to_string()))
    }
}

/// Bitmask of a set of variables in coupling-index layout.
pub fn mask_of(vars: &[VariableId]) -> u8 {
    vars.iter().fold(0u8, |m, v| m | v.bit())
}

/// Variables present in a coupling-index mask, in canonical order.
pub fn vars_of_mask(mask: u8) -> Vec<VariableId> {
    VariableId::ALL.into_iter().filter(|v| mask & v.bit() != 0).collect()
}

/// Canonical column index of a full ±1 assignment.
pub fn index_of(assignment: &[(VariableId, i8)]) -> Result<u8, ModelError> {
    let mut seen = 0u8;
    let mut index = 0u8;
    for &(var, spin) in assignment {
        if seen & var.bit() != 0 {
            return Err(ModelError::DuplicateVariable(var));
        }
        seen |= var.bit();
        match spin {
            1 => index |= var.bit(),
            -1 => {}
            other => return Err(ModelError::InvalidSpin(other)),
        }
    }
    if let Some(missing) = VariableId::ALL.into_iter().find(|v| seen & v.bit() == 0) {
        return Err(ModelError::MissingVariable(missing));
    }
    Ok(index)
}

/// Inverse of [`index_of`]: spins in canonical order.
pub fn decode(index: u8) -> [i8; 8] {
    VariableId::ALL.map(|v| if index & v.bit() != 0 { 1 } else { -1 })
}

fn check_half_range(what: &str, x: &Scalar) -> Result<(), ModelError> {
    let below = x.signum() == std::cmp::Ordering::Less;
    let above = (&Scalar::half() - x).signum() == std::cmp::Ordering::Less;
    if below || above {
        return Err(ModelError::OutOfRange { what: what.to_string(), value: x.to_string() });
    }
    Ok(())
}

/// Converts every component to approximate mode if any one is approximate.
fn harmonize(values: [Scalar; 4]) -> [Scalar; 4] {
    if values.iter().all(Scalar::is_exact) {
        values
    } else {
        values.map(|v| v.to_approx())
    }
}

/// `p = (p11, p12, p21, p22)` with `p_ij = Pr[A_ij = B_ij = +1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeVector([Scalar; 4]);

impl OutcomeVector {
    pub const NAMES: [&'static str; 4] = ["p11", "p12", "p21", "p22"];

    /// Rejects components outside [0, 1/2]. Mixed exact and approximate input
    /// is converted to approximate.
    pub fn new(components: [Scalar; 4]) -> Result<Self, ModelError> {
        let components = harmonize(components);
        for (name, x) in Self::NAMES.iter().zip(&components) {
            check_half_range(name, x)?;
        }
        Ok(OutcomeVector(components))
    }

    pub fn from_ratios(v: [(i64, i64); 4]) -> Result<Self, ModelError> {
        Self::new(v.map(|(n, d)| Scalar::ratio(n, d)))
    }

    pub fn components(&self) -> &[Scalar; 4] {
        &self.0
    }

    /// `p_ij`, `i`, `j` in {1, 2}.
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.0[2 * (i - 1) + (j - 1)]
    }

    pub fn is_exact(&self) -> bool {
        self.0[0].is_exact()
    }

    /// The outcome-pair variables `(A_ij, B_ij)` for component index `k`.
    pub fn pair_variables(k: usize) -> (VariableId, VariableId) {
        let (i, j) = (k / 2 + 1, k % 2 + 1);
        (VariableId::alice(i, j), VariableId::bob(i, j))
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// `ε = (ε₁¹, ε₂¹, ε₁², ε₂²)`: `2ε_i¹ = Pr[A_i1 ≠ A_i2]` and
/// `2ε_j² = Pr[B_1j ≠ B_2j]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionVector([Scalar; 4]);

impl ConnectionVector {
    pub const NAMES: [&'static str; 4] = ["eps1^1", "eps2^1", "eps1^2", "eps2^2"];

    pub fn new(components: [Scalar; 4]) -> Result<Self, ModelError> {
        let components = harmonize(components);
        for (name, x) in Self::NAMES.iter().zip(&components) {
            check_half_range(name, x)?;
        }
        Ok(ConnectionVector(components))
    }

    pub fn from_ratios(v: [(i64, i64); 4]) -> Result<Self, ModelError> {
        Self::new(v.map(|(n, d)| Scalar::ratio(n, d)))
    }

    /// ε₀: the identity connections of the non-contextual case.
    pub fn null() -> Self {
        ConnectionVector(std::array::from_fn(|_| Scalar::zero()))
    }

    /// All pairs independent.
    pub fn independent() -> Self {
        ConnectionVector(std::array::from_fn(|_| Scalar::ratio(1, 4)))
    }

    /// All four components `(√2 − 1)/8`; its compatible outcome vectors are
    /// exactly those within the Tsirelson bounds.
    pub fn tsirelson() -> Self {
        let e = (&Scalar::sqrt2() - &Scalar::one()) / Scalar::integer(8);
        ConnectionVector(std::array::from_fn(|_| e.clone()))
    }

    pub fn components(&self) -> &[Scalar; 4] {
        &self.0
    }

    pub fn is_exact(&self) -> bool {
        self.0[0].is_exact()
    }

    /// The connection pair for component index `k`.
    pub fn pair_variables(k: usize) -> (VariableId, VariableId) {
        match k {
            0 => (VariableId::A11, VariableId::A12),
            1 => (VariableId::A21, VariableId::A22),
            2 => (VariableId::B11, VariableId::B21),
            3 => (VariableId::B12, VariableId::B22),
            _ => panic!("connection index {k} out of range"),
        }
    }
}

impl fmt::Display for ConnectionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.0[0], self.0[1], self.0[2], self.0[3])
    }
}

/// A joint distribution over all 256 spin assignments.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable(Vec<Scalar>);

impl CouplingTable {
    pub const SIZE: usize = 256;

    pub fn new(probs: Vec<Scalar>) -> Result<Self, ModelError> {
        if probs.len() != Self::SIZE {
            return Err(ModelError::TableLength { expected: Self::SIZE, got: probs.len() });
        }
        for (i, q) in probs.iter().enumerate() {
            if q.signum() == std::cmp::Ordering::Less {
                return Err(ModelError::NegativeProbability {
                    variables: "coupling".into(),
                    outcome: i.to_string(),
                    value: q.to_string(),
                });
            }
        }
        let total = probs.iter().fold(Scalar::zero(), |acc, q| &acc + q);
        if !(&total - &Scalar::one()).is_zero() {
            return Err(ModelError::NotNormalized(total.to_string()));
        }
        Ok(CouplingTable(probs))
    }

    pub fn probs(&self) -> &[Scalar] {
        &self.0
    }

    /// Probability that every variable in `mask` equals `+1`.
    pub fn prob_mask(&self, mask: u8) -> Scalar {
        self.0
            .iter()
            .enumerate()
            .filter(|(col, _)| (*col as u8) & mask == mask)
            .fold(Scalar::zero(), |acc, (_, q)| &acc + q)
    }

    pub fn prob_all_plus(&self, vars: &[VariableId]) -> Scalar {
        self.prob_mask(mask_of(vars))
    }

    /// Joint table of `vars`, indexed as in [`MarginalSpec::full_table`].
    pub fn marginal_table(&self, vars: &[VariableId]) -> Vec<Scalar> {
        let mut table = vec![Scalar::zero(); 1 << vars.len()];
        for (col, q) in self.0.iter().enumerate() {
            let local = vars
                .iter()
                .enumerate()
                .fold(0usize, |m, (i, v)| if col as u8 & v.bit() != 0 { m | (1 << i) } else { m });
            table[local] = &table[local] + q;
        }
        table
    }

    pub fn outcome_vector(&self) -> Result<OutcomeVector, ModelError> {
        OutcomeVector::new(std::array::from_fn(|k| {
            let (a, b) = OutcomeVector::pair_variables(k);
            self.prob_all_plus(&[a, b])
        }))
    }

    /// Connection vector read off the table: `ε = Pr[X = +1, Y = −1]`.
    pub fn connection_vector(&self) -> Result<ConnectionVector, ModelError> {
        ConnectionVector::new(std::array::from_fn(|k| {
            let (x, y) = ConnectionVector::pair_variables(k);
            &self.prob_all_plus(&[x]) - &self.prob_all_plus(&[x, y])
        }))
    }
}

impl Serialize for CouplingTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CouplingTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let probs = Vec::<Scalar>::deserialize(deserializer)?;
        CouplingTable::new(probs).map_err(serde::de::Error::custom)
    }
}

/// A fixed distribution on a subset of the eight variables, held in the
/// all-ones parameterization: entry `S` (a bitmask over `variables`, bit `i`
/// for `variables[i]`) is `Pr[every variable in S = +1]`, with `Pr[] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSpec {
    variables: Vec<VariableId>,
    all_plus: Vec<Scalar>,
}

fn names(vars: &[VariableId]) -> String {
    vars.iter().map(|v| v.name()).collect::<Vec<_>>().join(",")
}

fn sign_string(local: usize, k: usize) -> String {
    (0..k).map(|i| if local & (1 << i) != 0 { '+' } else { '-' }).collect()
}

fn check_distinct(variables: &[VariableId]) -> Result<(), ModelError> {
    let mut seen = 0u8;
    for &v in variables {
        if seen & v.bit() != 0 {
            return Err(ModelError::DuplicateVariable(v));
        }
        seen |= v.bit();
    }
    Ok(())
}

/// Inclusion-exclusion from all-ones probabilities to the full joint table.
///
/// Table entry `S` is `Pr[variables in S are +1, the rest −1]`
/// `= Σ_{T ⊇ S} (−1)^{|T∖S|} Pr[all of T = +1]`.
pub fn inclusion_exclusion(all_plus: &[Scalar]) -> Vec<Scalar> {
    let n = all_plus.len();
    (0..n)
        .map(|s| {
            let mut acc = Scalar::zero();
            for (t, value) in all_plus.iter().enumerate() {
                if t & s == s {
                    if (t ^ s).count_ones() % 2 == 0 {
                        acc = &acc + value;
                    } else {
                        acc = &acc - value;
                    }
                }
            }
            acc
        })
        .collect()
}

/// Superset sums: the all-ones parameterization of a full joint table.
pub fn superset_sums(table: &[Scalar]) -> Vec<Scalar> {
    let n = table.len();
    (0..n)
        .map(|s| table.iter().enumerate().filter(|(t, _)| t & s == s).fold(Scalar::zero(), |acc, (_, v)| &acc + v))
        .collect()
}

impl MarginalSpec {
    /// Builds a spec from `Pr[all = +1]` values, one per nonempty subset of
    /// `variables`. The empty subset defaults to 1 and must equal 1.
    pub fn from_all_plus<I>(variables: Vec<VariableId>, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Vec<VariableId>, Scalar)>,
    {
        check_distinct(&variables)?;
        let k = variables.len();
        let mut slots: Vec<Option<Scalar>> = vec![None; 1 << k];
        for (subset, value) in entries {
            let mut local = 0usize;
            for v in &subset {
                let i = variables.iter().position(|w| w == v).ok_or_else(|| {
                    ModelError::InvalidSpec(format!("{v} is not among the variables {}", names(&variables)))
                })?;
                local |= 1 << i;
            }
            if slots[local].replace(value).is_some() {
                return Err(ModelError::InvalidSpec(format!("subset `{}` given twice", names(&subset))));
            }
        }
        if slots[0].is_none() {
            slots[0] = Some(Scalar::one());
        }
        let all_plus = slots
            .into_iter()
            .enumerate()
            .map(|(local, v)| v.ok_or_else(|| ModelError::MissingSubset(names(&Self::subset_vars(&variables, local)))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parts(variables, all_plus)
    }

    /// Builds a spec from its full joint table (entry `S` has the variables in
    /// bitmask `S` at `+1` and the rest at `−1`).
    pub fn from_table(variables: Vec<VariableId>, table: Vec<Scalar>) -> Result<Self, ModelError> {
        check_distinct(&variables)?;
        if table.len() != 1 << variables.len() {
            return Err(ModelError::TableLength { expected: 1 << variables.len(), got: table.len() });
        }
        Self::from_parts(variables, superset_sums(&table))
    }

    fn from_parts(variables: Vec<VariableId>, all_plus: Vec<Scalar>) -> Result<Self, ModelError> {
        if !(&all_plus[0] - &Scalar::one()).is_zero() {
            return Err(ModelError::NotNormalized(all_plus[0].to_string()));
        }
        let spec = MarginalSpec { variables, all_plus };
        for (local, value) in spec.full_table().iter().enumerate() {
            if value.signum() == std::cmp::Ordering::Less {
                return Err(ModelError::NegativeProbability {
                    variables: names(&spec.variables),
                    outcome: sign_string(local, spec.variables.len()),
                    value: value.to_string(),
                });
            }
        }
        Ok(spec)
    }

    /// Two ±1 variables with equiprobable values and `Pr[both = +1] = both_plus`.
    pub fn pair(x: VariableId, y: VariableId, both_plus: Scalar) -> Result<Self, ModelError> {
        Self::from_all_plus(vec![x, y], [(vec![x], Scalar::half()), (vec![y], Scalar::half()), (vec![x, y], both_plus)])
    }

    /// A single equiprobable variable.
    pub fn uniform(x: VariableId) -> Self {
        MarginalSpec { variables: vec![x], all_plus: vec![Scalar::one(), Scalar::half()] }
    }

    fn subset_vars(variables: &[VariableId], local: usize) -> Vec<VariableId> {
        variables.iter().enumerate().filter(|(i, _)| local & (1 << i) != 0).map(|(_, v)| *v).collect()
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    /// All-ones probabilities indexed by local subset bitmask.
    pub fn all_plus(&self) -> &[Scalar] {
        &self.all_plus
    }

    /// Coupling-index mask of a local subset.
    pub fn global_mask(&self, local: usize) -> u8 {
        mask_of(&Self::subset_vars(&self.variables, local))
    }

    /// `(coupling mask, Pr[all = +1])` for every subset, empty subset first.
    pub fn rows(&self) -> impl Iterator<Item = (u8, &Scalar)> + '_ {
        self.all_plus.iter().enumerate().map(move |(local, v)| (self.global_mask(local), v))
    }

    /// Full joint table over `variables`, entry `S` having the variables in
    /// `S` at `+1` and the rest at `−1`.
    pub fn full_table(&self) -> Vec<Scalar> {
        inclusion_exclusion(&self.all_plus)
    }
}

/// Connection marginals `(A_i1, A_i2)` and `(B_1j, B_2j)` with
/// `Pr[both = +1] = 1/2 − ε`.
pub fn connection_marginals(eps: &ConnectionVector) -> Vec<MarginalSpec> {
    eps.components()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (x, y) = ConnectionVector::pair_variables(k);
            MarginalSpec::pair(x, y, &Scalar::half() - e).expect("valid connection gives a valid marginal")
        })
        .collect()
}

/// Observable marginals `(A_ij, B_ij)` with `Pr[both = +1] = p_ij`.
pub fn outcome_marginals(p: &OutcomeVector) -> Vec<MarginalSpec> {
    p.components()
        .iter()
        .enumerate()
        .map(|(k, pij)| {
            let (a, b) = OutcomeVector::pair_variables(k);
            MarginalSpec::pair(a, b, pij.clone()).expect("valid outcome gives a valid marginal")
        })
        .collect()
}

/// JSON shape of a marginal: `variables` plus either `prob_all_plus` (keys
/// are comma-separated variable names, `""` for the empty subset) or `table`
/// (keys are sign strings over `variables`, e.g. `"+-"`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalSpecJson {
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob_all_plus: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<BTreeMap<String, String>>,
}

impl TryFrom<MarginalSpecJson> for MarginalSpec {
    type Error = ModelError;

    fn try_from(json: MarginalSpecJson) -> Result<Self, ModelError> {
        let variables = json.variables.iter().map(|s| s.parse()).collect::<Result<Vec<VariableId>, _>>()?;
        match (json.prob_all_plus, json.table) {
            (Some(map), None) => {
                let mut entries = Vec::with_capacity(map.len());
                for (key, value) in map {
                    let subset = if key.trim().is_empty() {
                        Vec::new()
                    } else {
                        key.split(',').map(|s| s.parse()).collect::<Result<Vec<VariableId>, _>>()?
                    };
                    entries.push((subset, value.parse::<Scalar>()?));
                }
                MarginalSpec::from_all_plus(variables, entries)
            }
            (None, Some(map)) => {
                let k = variables.len();
                let mut table: Vec<Option<Scalar>> = vec![None; 1 << k];
                for (key, value) in map {
                    let signs: Vec<char> = key.trim().chars().collect();
                    if signs.len() != k || signs.iter().any(|c| *c != '+' && *c != '-') {
                        return Err(ModelError::InvalidSpec(format!("bad table key `{key}`")));
                    }
                    let local =
                        signs.iter().enumerate().fold(0usize, |m, (i, c)| if *c == '+' { m | (1 << i) } else { m });
                    table[local] = Some(value.parse()?);
                }
                let table = table
                    .into_iter()
                    .enumerate()
                    .map(|(local, v)| v.ok_or_else(|| ModelError::MissingSubset(sign_string(local, k))))
                    .collect::<Result<Vec<_>, _>>()?;
                MarginalSpec::from_table(variables, table)
            }
            _ => Err(ModelError::InvalidSpec("give exactly one of `prob_all_plus` and `table`".into())),
        }
    }
}

impl From<&MarginalSpec> for MarginalSpecJson {
    fn from(spec: &MarginalSpec) -> Self {
        let map = spec
            .all_plus
            .iter()
            .enumerate()
            .map(|(local, v)| (names(&MarginalSpec::subset_vars(&spec.variables, local)), v.to_string()))
            .collect();
        MarginalSpecJson {
            variables: spec.variables.iter().map(|v| v.name().to_string()).collect(),
            prob_all_plus: Some(map),
            table: None,
        }
    }
}

impl Serialize for MarginalSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MarginalSpecJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarginalSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = MarginalSpecJson::deserialize(deserializer)?;
        MarginalSpec::try_from(json).map_err(serde::de::Error::custom)
    }
}

/// Parses a marginal file: either a JSON array of specs or an object with a
/// `marginals` array.
pub fn parse_marginals_json(text: &str) -> Result<Vec<MarginalSpec>, ModelError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum File {
        List(Vec<MarginalSpecJson>),
        Wrapped { marginals: Vec<MarginalSpecJson> },
    }
    let file: File = serde_json::from_str(text).map_err(|e| ModelError::InvalidSpec(e.to_string()))?;
    let list = match file {
        File::List(l) => l,
        File::Wrapped { marginals } => marginals,
    };
    list.into_iter().map(MarginalSpec::try_from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use VariableId::*;

    fn h() -> Scalar {
        Scalar::half()
    }

    #[test]
    fn index_examples() {
        let all = |s: i8| VariableId::ALL.map(|v| (v, s));
        assert_eq!(index_of(&all(1)).unwrap(), 255);
        assert_eq!(index_of(&all(-1)).unwrap(), 0);
        let mut a = all(-1);
        a[0].1 = 1;
        assert_eq!(index_of(&a).unwrap(), 128);
        assert_eq!(decode(128), [1, -1, -1, -1, -1, -1, -1, -1]);
    }

    #[test]
    fn index_errors() {
        let mut a = VariableId::ALL.map(|v| (v, 1i8)).to_vec();
        a.pop();
        assert_eq!(index_of(&a), Err(ModelError::MissingVariable(B22)));
        a.push((A11, 1));
        assert_eq!(index_of(&a), Err(ModelError::DuplicateVariable(A11)));
        let mut b = VariableId::ALL.map(|v| (v, 1i8));
        b[3].1 = 0;
        assert_eq!(index_of(&b), Err(ModelError::InvalidSpin(0)));
    }

    #[test]
    fn full_table_examples() {
        let single = MarginalSpec::from_all_plus(vec![A11], [(vec![A11], h())]).unwrap();
        assert_eq!(single.full_table(), vec![h(), h()]);

        let locked = MarginalSpec::pair(A11, A12, h()).unwrap();
        // entries: (−,−), (+,−), (−,+), (+,+)
        assert_eq!(locked.full_table(), vec![h(), Scalar::zero(), Scalar::zero(), h()]);

        let bad = MarginalSpec::pair(A11, A12, Scalar::ratio(3, 4));
        match bad {
            Err(ModelError::NegativeProbability { value, .. }) => assert_eq!(value, "-1/4"),
            other => panic!("expected negative probability, got {other:?}"),
        }
    }

    #[test]
    fn empty_subset_must_be_one() {
        let r =
            MarginalSpec::from_all_plus(vec![A11], [(vec![], Scalar::ratio(1, 2)), (vec![A11], Scalar::ratio(1, 4))]);
        assert!(matches!(r, Err(ModelError::NotNormalized(_))));
        let r = MarginalSpec::from_all_plus(vec![A11, B11], [(vec![A11], h())]);
        assert!(matches!(r, Err(ModelError::MissingSubset(_))));
    }

    #[test]
    fn connection_marginal_examples() {
        let zero = connection_marginals(&ConnectionVector::null());
        assert_eq!(zero.len(), 4);
        for spec in &zero {
            let t = spec.full_table();
            assert!(t[1].is_zero() && t[2].is_zero());
        }
        let ind = connection_marginals(&ConnectionVector::independent());
        for spec in &ind {
            assert_eq!(spec.all_plus()[3], Scalar::ratio(1, 4));
        }
        let flipped = connection_marginals(&ConnectionVector::from_ratios([(1, 2), (1, 2), (0, 1), (0, 1)]).unwrap());
        for spec in &flipped[..2] {
            let t = spec.full_table();
            assert_eq!(&t[1] + &t[2], Scalar::one());
        }
        assert_eq!(flipped[0].variables(), &[A11, A12]);
        assert_eq!(flipped[1].variables(), &[A21, A22]);
        assert_eq!(flipped[2].variables(), &[B11, B21]);
        assert_eq!(flipped[3].variables(), &[B12, B22]);
    }

    #[test]
    fn outcome_marginal_examples() {
        let pr = outcome_marginals(&OutcomeVector::from_ratios([(1, 2), (1, 2), (1, 2), (0, 1)]).unwrap());
        for spec in &pr[..3] {
            let t = spec.full_table();
            assert!(t[1].is_zero() && t[2].is_zero());
        }
        let t = pr[3].full_table();
        assert!(t[0].is_zero() && t[3].is_zero());
        assert_eq!(pr[3].variables(), &[A22, B22]);

        let p11: Scalar = "(2-sqrt2)/8".parse().unwrap();
        let p =
            OutcomeVector::new([p11.clone(), Scalar::ratio(1, 4), Scalar::ratio(1, 4), Scalar::ratio(1, 4)]).unwrap();
        assert_eq!(outcome_marginals(&p)[0].all_plus()[3], p11);
    }

    #[test]
    fn range_checks() {
        assert!(OutcomeVector::from_ratios([(3, 4), (0, 1), (0, 1), (0, 1)]).is_err());
        assert!(ConnectionVector::from_ratios([(-1, 8), (0, 1), (0, 1), (0, 1)]).is_err());
        let mixed = OutcomeVector::new([Scalar::approx(0.25), Scalar::half(), Scalar::zero(), Scalar::zero()]).unwrap();
        assert!(!mixed.is_exact());
        assert!(mixed.components().iter().all(|c| !c.is_exact()));
    }

    #[test]
    fn json_forms() {
        let text = r#"[{"variables": ["A11","A12"], "prob_all_plus": {"": "1", "A11": "1/2", "A12": "1/2", "A11,A12": "1/2"}},
                       {"variables": ["B11","B21"], "table": {"++": "3/8", "--": "3/8", "+-": "1/8", "-+": "1/8"}}]"#;
        let specs = parse_marginals_json(text).unwrap();
        assert_eq!(specs[0], MarginalSpec::pair(A11, A12, h()).unwrap());
        assert_eq!(specs[1], MarginalSpec::pair(B11, B21, Scalar::ratio(3, 8)).unwrap());
        let back = serde_json::to_string(&specs[1]).unwrap();
        assert_eq!(serde_json::from_str::<MarginalSpec>(&back).unwrap(), specs[1]);
        let wrapped = format!(r#"{{"marginals": {text}}}"#);
        assert_eq!(parse_marginals_json(&wrapped).unwrap(), specs);
    }

    #[test]
    fn coupling_table_checks() {
        let uniform = CouplingTable::new(vec![Scalar::ratio(1, 256); 256]).unwrap();
        assert_eq!(uniform.prob_all_plus(&[A11, B22]), Scalar::ratio(1, 4));
        assert_eq!(uniform.outcome_vector().unwrap(), OutcomeVector::from_ratios([(1, 4); 4]).unwrap());
        assert_eq!(uniform.connection_vector().unwrap(), ConnectionVector::independent());
        assert!(CouplingTable::new(vec![Scalar::ratio(1, 128); 256]).is_err());
        assert!(CouplingTable::new(vec![Scalar::zero(); 3]).is_err());
        let json = serde_json::to_string(&uniform).unwrap();
        assert_eq!(serde_json::from_str::<CouplingTable>(&json).unwrap(), uniform);
    }
}
