//! Dense two-phase primal simplex over an exact ordered field.
//!
//! Solves `maximize c·x subject to A x = b, x ≥ 0`. The entering column is
//! the one with the largest reduced cost until a run of degenerate pivots
//! occurs; from then on the phase uses Bland's rule (lowest-index entering
//! column, lowest-index leaving basic variable among ratio ties), which
//! cannot cycle, so the method terminates without perturbation.

use std::fmt;

use crate::scalar::{QSqrt2, Rational, Scalar};

/// Exact ordered field arithmetic needed by the simplex method.
pub trait LpField: Clone + Ord + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Callers never divide by zero.
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    /// `None` when the scalar is approximate or outside this field.
    fn from_scalar(s: &Scalar) -> Option<Self>;
    fn to_scalar(&self) -> Scalar;
}

impl LpField for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        self.signum() == std::cmp::Ordering::Greater
    }
    fn from_scalar(s: &Scalar) -> Option<Self> {
        s.as_rational().cloned()
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::from(self.clone())
    }
}

impl LpField for QSqrt2 {
    fn zero() -> Self {
        QSqrt2::zero()
    }
    fn one() -> Self {
        QSqrt2::one()
    }
    fn is_zero(&self) -> bool {
        QSqrt2::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_positive(&self) -> bool {
        self.signum() == std::cmp::Ordering::Greater
    }
    fn from_scalar(s: &Scalar) -> Option<Self> {
        s.as_exact().cloned()
    }
    fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.clone())
    }
}

/// `maximize c·x subject to A x = b, x ≥ 0`, with `A` dense row-major.
#[derive(Clone, Debug)]
pub struct Problem<F> {
    pub a: Vec<Vec<F>>,
    pub b: Vec<F>,
    pub c: Vec<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<F> {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<F>, value: F },
}

/// Consecutive zero-step pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 32;

struct Tableau<F> {
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
    /// Basic column per row; `>= n` marks the artificial variable of a row.
    basis: Vec<usize>,
    /// Reduced costs of the structural columns.
    reduced: Vec<F>,
    value: F,
    n: usize,
}

impl<F: LpField> Tableau<F> {
    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j].clone();
        let one = F::one();
        if piv != one {
            let inv = one.div(&piv);
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x = x.mul(&inv);
                }
            }
            self.rhs[r] = self.rhs[r].mul(&inv);
        }
        let support: Vec<(usize, F)> =
            self.rows[r].iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(k, x)| (k, x.clone())).collect();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][j].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (k, x) in &support {
                row[*k] = row[*k].sub(&f.mul(x));
            }
            if !pivot_rhs.is_zero() {
                self.rhs[i] = self.rhs[i].sub(&f.mul(&pivot_rhs));
            }
        }
        let f = self.reduced[j].clone();
        if !f.is_zero() {
            for (k, x) in &support {
                self.reduced[*k] = self.reduced[*k].sub(&f.mul(x));
            }
            self.value = self.value.add(&f.mul(&pivot_rhs));
        }
        self.basis[r] = j;
    }

    /// Pivots to optimality. Returns `false` if unbounded.
    fn optimize(&mut self) -> bool {
        let mut degenerate_run = 0;
        loop {
            let entering = if degenerate_run < DEGENERATE_LIMIT {
                (0..self.n)
                    .filter(|&j| self.reduced[j].is_positive())
                    .max_by(|&a, &b| self.reduced[a].cmp(&self.reduced[b]).then(b.cmp(&a)))
            } else {
                (0..self.n).find(|&j| self.reduced[j].is_positive())
            };
            let Some(j) = entering else {
                return true;
            };
            let mut leave: Option<(usize, F)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => match ratio.cmp(best) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => self.basis[i] < self.basis[*l],
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate_run += 1;
                    } else if degenerate_run < DEGENERATE_LIMIT {
                        degenerate_run = 0;
                    }
                    self.pivot(r, j)
                }
                None => return false,
            }
        }
    }
}

/// Two-phase simplex. Phase 1 maximizes minus the sum of one artificial per
/// row; artificials are dropped from the tableau once they leave the basis.
pub fn solve<F: LpField>(problem: &Problem<F>) -> Outcome<F> {
    let m = problem.b.len();
    let n = problem.c.len();
    assert_eq!(problem.a.len(), m, "row count mismatch");

    let mut rows = problem.a.clone();
    let mut rhs = problem.b.clone();
    for i in 0..m {
        assert_eq!(rows[i].len(), n, "column count mismatch in row {i}");
        if rhs[i] < F::zero() {
            rhs[i] = rhs[i].neg();
            for x in rows[i].iter_mut() {
                *x = x.neg();
            }
        }
    }
    let reduced = (0..n).fold(vec![F::zero(); n], |mut acc, j| {
        for row in &rows {
            if !row[j].is_zero() {
                acc[j] = acc[j].add(&row[j]);
            }
        }
        acc
    });
    let value = rhs.iter().fold(F::zero(), |acc, b| acc.sub(b));
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect(), reduced, value, n };

    // Phase 1 is bounded above by zero.
    t.optimize();
    if t.value.neg().is_positive() {
        return Outcome::Infeasible;
    }

    // Drive zero-level artificials out of the basis; rows where that is
    // impossible are linearly dependent and are dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2.
    let mut reduced = problem.c.clone();
    let mut value = F::zero();
    for (i, &bj) in t.basis.iter().enumerate() {
        let cb = &problem.c[bj];
        if cb.is_zero() {
            continue;
        }
        value = value.add(&cb.mul(&t.rhs[i]));
        for (j, x) in t.rows[i].iter().enumerate() {
            if !x.is_zero() {
                reduced[j] = reduced[j].sub(&cb.mul(x));
            }
        }
    }
    t.reduced = reduced;
    t.value = value;
    if !t.optimize() {
        return Outcome::Unbounded;
    }

    let mut x = vec![F::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        x[bj] = t.rhs[i].clone();
    }
    Outcome::Optimal { x, value: t.value }
}
