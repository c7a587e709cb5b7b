//! Seeded suites that check the closed-form criteria against the exact LP and
//! against each other, each producing a serializable pass/fail report.
//!
//! Trials are sampled from independent streams (`seed`, trial index) and run
//! in parallel; results are collected in trial order, so reports depend only
//! on their parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lp::{feasible, optimize, witness_reproduces, LpError};
use crate::model::{connection_marginals, outcome_marginals, ConnectionVector, MarginalSpec, OutcomeVector};
use crate::qm::{qm_outcomes, Angle, Settings};
use crate::regions::{
    least_collinear_triple, membership_grid, trace_boundary_along, BoundaryPoint, Region, RegionError, Slice,
    BOUNDARY_TOLERANCE,
};
use crate::scalar::{Rational, Scalar};
use crate::stats::{
    chsh_satisfied, compatible, enumerate_e0, noforcing_counterexample, qm_compliant, s_pair_connection,
    tsirelson_satisfied, tsirelson_upper, QmClass,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("slice values must lie strictly between 0 and 1/2, got ({0}, {1})")]
    DegenerateSlice(String, String),
    #[error("grid density {0} is below the minimum of 2")]
    Density(usize),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Largest denominator of sampled rationals.
pub const MAX_DENOMINATOR: i64 = 64;

/// Generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A rational in `[0, 1/2]` with denominator at most [`MAX_DENOMINATOR`];
/// a quarter of draws land exactly on 0 or 1/2.
pub fn random_component<R: Rng>(rng: &mut R) -> Scalar {
    match rng.gen_range(0..8) {
        0 => Scalar::zero(),
        1 => Scalar::half(),
        _ => {
            let d = rng.gen_range(1..=MAX_DENOMINATOR);
            Scalar::ratio(rng.gen_range(0..=d / 2), d)
        }
    }
}

pub fn random_outcome<R: Rng>(rng: &mut R) -> OutcomeVector {
    OutcomeVector::new(std::array::from_fn(|_| random_component(rng))).expect("components in [0, 1/2]")
}

pub fn random_connection<R: Rng>(rng: &mut R) -> ConnectionVector {
    ConnectionVector::new(std::array::from_fn(|_| random_component(rng))).expect("components in [0, 1/2]")
}

/// LP witnesses checked by re-marginalization.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WitnessTally {
    pub checked: usize,
    pub failures: usize,
}

impl WitnessTally {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn merge(&mut self, other: &WitnessTally) {
        self.checked += other.checked;
        self.failures += other.failures;
    }
}

/// Solves the coupling LP for `specs` (and `p`, if given), checking any
/// witness against every input marginal.
fn lp_verdict(specs: &[MarginalSpec], p: Option<&OutcomeVector>, tally: &mut WitnessTally) -> Result<bool, LpError> {
    let f = feasible(specs, p)?;
    if let Some(w) = &f.witness {
        tally.record(witness_reproduces(specs, p, w));
    }
    Ok(f.feasible)
}

fn joint_specs(p: &OutcomeVector, eps: &ConnectionVector) -> Vec<MarginalSpec> {
    let mut specs = outcome_marginals(p);
    specs.extend(connection_marginals(eps));
    specs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Case {
    pub trial: u64,
    pub p: OutcomeVector,
    pub eps: ConnectionVector,
    pub closed_form: bool,
    pub lp: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub seed: u64,
    pub trials: u64,
    pub agreements: u64,
    pub compatible: u64,
    pub disagreements: Vec<Lemma1Case>,
    pub witnesses: WitnessTally,
    pub passed: bool,
}

/// Closed-form compatibility against LP feasibility on random `(p, ε)`.
pub fn verify_lemma1(trials: u64, seed: u64) -> Lemma1Report {
    verify_lemma1_with(trials, seed, compatible)
}

/// As [`verify_lemma1`] with the closed-form criterion replaced by `criterion`.
pub fn verify_lemma1_with<C>(trials: u64, seed: u64, criterion: C) -> Lemma1Report
where
    C: Fn(&OutcomeVector, &ConnectionVector) -> bool + Sync,
{
    let results: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let p = random_outcome(&mut rng);
            let eps = random_connection(&mut rng);
            let closed_form = criterion(&p, &eps);
            let mut tally = WitnessTally::default();
            let (lp, error) = match lp_verdict(&joint_specs(&p, &eps), None, &mut tally) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            (Lemma1Case { trial, p, eps, closed_form, lp, error }, tally)
        })
        .collect();

    let mut report = Lemma1Report {
        seed,
        trials,
        agreements: 0,
        compatible: 0,
        disagreements: Vec::new(),
        witnesses: WitnessTally::default(),
        passed: false,
    };
    for (case, tally) in results {
        report.witnesses.merge(&tally);
        report.compatible += case.closed_form as u64;
        if case.lp == Some(case.closed_form) {
            report.agreements += 1;
        } else {
            report.disagreements.push(case);
        }
    }
    report.passed = report.disagreements.is_empty() && report.witnesses.failures == 0;
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FineCase {
    pub trial: u64,
    pub p: OutcomeVector,
    pub compatible_with_null: bool,
    pub chsh: bool,
    /// Verdict for each member of the null-connection class, in
    /// [`enumerate_e0`] order.
    pub class_verdicts: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FineReport {
    pub seed: u64,
    pub trials: u64,
    pub agreements: u64,
    pub disagreements: Vec<FineCase>,
    pub pr_box_incompatible_with_all: bool,
    pub uniform_compatible_with_all: bool,
    pub passed: bool,
}

fn fine_case(trial: u64, p: OutcomeVector, class: &[ConnectionVector]) -> FineCase {
    FineCase {
        trial,
        compatible_with_null: compatible(&p, &ConnectionVector::null()),
        chsh: chsh_satisfied(&p),
        class_verdicts: class.iter().map(|e| compatible(&p, e)).collect(),
        p,
    }
}

impl FineCase {
    fn consistent(&self) -> bool {
        self.compatible_with_null == self.chsh && self.class_verdicts.iter().all(|&v| v == self.chsh)
    }
}

/// Compatibility with the null connection against CHSH, and uniform verdicts
/// across the whole class of connections with `s₀ = 1`.
pub fn verify_fine(trials: u64, seed: u64) -> FineReport {
    let class = enumerate_e0();
    let cases: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| fine_case(trial, random_outcome(&mut trial_rng(seed, trial)), &class))
        .collect();
    let pr = OutcomeVector::from_ratios([(1, 2), (1, 2), (1, 2), (0, 1)]).expect("valid");
    let uniform = OutcomeVector::from_ratios([(1, 4); 4]).expect("valid");
    let pr_box_incompatible_with_all = class.iter().all(|e| !compatible(&pr, e));
    let uniform_compatible_with_all = class.iter().all(|e| compatible(&uniform, e));
    let agreements = cases.iter().filter(|c| c.consistent()).count() as u64;
    let disagreements: Vec<_> = cases.into_iter().filter(|c| !c.consistent()).collect();
    FineReport {
        seed,
        trials,
        agreements,
        passed: disagreements.is_empty() && pr_box_incompatible_with_all && uniform_compatible_with_all,
        disagreements,
        pr_box_incompatible_with_all,
        uniform_compatible_with_all,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct E0Case {
    pub trial: u64,
    pub p: OutcomeVector,
    pub member: ConnectionVector,
    pub null_verdict: bool,
    pub member_verdict: Option<bool>,
    pub method: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct E0Report {
    pub members: Vec<ConnectionVector>,
    /// Every member has `s₀ = 1` and `s₁ = 1/2` exactly.
    pub statistics_exact: bool,
    pub seed: u64,
    pub trials: u64,
    pub agreements: u64,
    /// Trials whose verdicts were also decided by LP for every member.
    pub lp_trials: u64,
    pub disagreements: Vec<E0Case>,
    pub witnesses: WitnessTally,
    pub passed: bool,
}

/// Trials in [`verify_e0`] whose member verdicts are also decided by LP.
pub const E0_LP_TRIALS: u64 = 100;

/// The eight connections with `s₀ = 1` and verdict equivalence with the null
/// connection, by closed form on every trial and by LP on the first
/// [`E0_LP_TRIALS`].
pub fn verify_e0(trials: u64, seed: u64) -> E0Report {
    let members = enumerate_e0();
    let statistics_exact = members.len() == 8
        && members.iter().all(|e| {
            let sp = s_pair_connection(e);
            sp.s0 == Scalar::one() && sp.s1 == Scalar::half()
        });
    let lp_trials = trials.min(E0_LP_TRIALS);
    let results: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let p = random_outcome(&mut trial_rng(seed, trial));
            let null_verdict = compatible(&p, &ConnectionVector::null());
            let mut bad = Vec::new();
            let mut tally = WitnessTally::default();
            for e in &members {
                let closed = compatible(&p, e);
                if closed != null_verdict {
                    bad.push(E0Case {
                        trial,
                        p: p.clone(),
                        member: e.clone(),
                        null_verdict,
                        member_verdict: Some(closed),
                        method: "closed_form",
                    });
                }
                if trial < lp_trials {
                    let lp = lp_verdict(&connection_marginals(e), Some(&p), &mut tally).ok();
                    if lp != Some(null_verdict) {
                        bad.push(E0Case {
                            trial,
                            p: p.clone(),
                            member: e.clone(),
                            null_verdict,
                            member_verdict: lp,
                            method: "lp",
                        });
                    }
                }
            }
            (bad, tally)
        })
        .collect();
    let mut witnesses = WitnessTally::default();
    let mut disagreements = Vec::new();
    let mut agreements = 0;
    for (bad, tally) in results {
        witnesses.merge(&tally);
        agreements += bad.is_empty() as u64;
        disagreements.extend(bad);
    }
    E0Report {
        passed: statistics_exact && disagreements.is_empty() && witnesses.failures == 0,
        members,
        statistics_exact,
        seed,
        trials,
        agreements,
        lp_trials,
        disagreements,
        witnesses,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TsirelsonCase {
    pub label: String,
    pub p: OutcomeVector,
    pub compatible: bool,
    pub tsirelson: bool,
    pub lp: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TsirelsonReport {
    pub connection: ConnectionVector,
    pub seed: u64,
    pub trials: u64,
    pub agreements: u64,
    pub disagreements: Vec<TsirelsonCase>,
    /// Exact points on and off the Tsirelson boundary, also decided by LP.
    pub fixed_cases: Vec<TsirelsonCase>,
    /// Maximum of `p11 + p12 + p21 − 2 p22` over couplings with this
    /// connection.
    pub support: Option<Scalar>,
    pub support_exact: bool,
    pub witnesses: WitnessTally,
    pub passed: bool,
}

/// The outcome vector with correlations `(1, 1, √2 − 1, 1 − √2)`: it meets
/// the Tsirelson bound with equality but violates cosphericity.
pub fn tsirelson_not_qm_witness() -> OutcomeVector {
    let q = |a: i64, b: i64, d: i64| Scalar::quadratic(Rational::new(a, d), Rational::new(b, d));
    OutcomeVector::new([Scalar::half(), Scalar::half(), q(0, 1, 4), q(2, -1, 4)]).expect("valid")
}

/// Settings `α = (0, π/2)`, `β = (π/4, −π/4)`.
pub fn angle_example_settings() -> Settings {
    Settings::Planar([
        Angle::pi_fraction(0, 1),
        Angle::pi_fraction(1, 2),
        Angle::pi_fraction(1, 4),
        Angle::pi_fraction(-1, 4),
    ])
}

/// Compatibility with the Tsirelson connection `ε = ((√2 − 1)/8, …)` against
/// the Tsirelson inequalities, plus the exact support value in the direction
/// `(1, 1, 1, −2)`.
pub fn verify_tsirelson(trials: u64, seed: u64) -> TsirelsonReport {
    let eps = ConnectionVector::tsirelson();
    let cases: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let p = random_outcome(&mut trial_rng(seed, trial));
            TsirelsonCase {
                label: format!("trial {trial}"),
                compatible: compatible(&p, &eps),
                tsirelson: tsirelson_satisfied(&p),
                lp: None,
                p,
            }
        })
        .collect();
    let agreements = cases.iter().filter(|c| c.compatible == c.tsirelson).count() as u64;
    let disagreements: Vec<_> = cases.into_iter().filter(|c| c.compatible != c.tsirelson).collect();

    let mut witnesses = WitnessTally::default();
    let fixed = [
        ("angle example", qm_outcomes(&angle_example_settings())),
        ("tsirelson-tight, not cospherical", tsirelson_not_qm_witness()),
        ("PR box", OutcomeVector::from_ratios([(1, 2), (1, 2), (1, 2), (0, 1)]).expect("valid")),
        ("uniform", OutcomeVector::from_ratios([(1, 4); 4]).expect("valid")),
    ];
    let fixed_cases: Vec<_> = fixed
        .into_iter()
        .map(|(label, p)| TsirelsonCase {
            label: label.to_string(),
            compatible: compatible(&p, &eps),
            tsirelson: tsirelson_satisfied(&p),
            lp: lp_verdict(&connection_marginals(&eps), Some(&p), &mut witnesses).ok(),
            p,
        })
        .collect();
    let fixed_ok = fixed_cases.iter().all(|c| c.compatible == c.tsirelson && c.lp == Some(c.compatible));

    let direction = [1, 1, 1, -2].map(Scalar::integer);
    let support = optimize(&connection_marginals(&eps), &direction).ok();
    let support_exact = support.as_ref() == Some(&tsirelson_upper());
    TsirelsonReport {
        connection: eps,
        seed,
        trials,
        agreements,
        passed: disagreements.is_empty() && fixed_ok && support_exact && witnesses.failures == 0,
        disagreements,
        fixed_cases,
        support,
        support_exact,
        witnesses,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoforcingFailure {
    pub eps: ConnectionVector,
    pub p: Option<OutcomeVector>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoforcingReport {
    pub density: usize,
    pub seed: u64,
    /// Connections with `s₀ < 1` for which a counterexample was sought.
    pub grid_checked: usize,
    pub random_checked: usize,
    pub named_checked: usize,
    /// Connections with `s₀ = 1` and the outcome vectors sampled for each.
    pub forcing_checked: usize,
    pub forcing_samples: usize,
    pub failures: Vec<NoforcingFailure>,
    pub witnesses: WitnessTally,
    pub passed: bool,
}

/// Random connections added to the grid in [`verify_noforcing`].
pub const NOFORCING_RANDOM: u64 = 256;
/// Outcome vectors sampled per connection with `s₀ = 1`.
pub const FORCING_SAMPLES: u64 = 64;

fn grid_connections(density: usize) -> Vec<ConnectionVector> {
    let step = 2 * (density as i64 - 1);
    let n = density.pow(4);
    (0..n)
        .map(|idx| {
            let digits: [i64; 4] = std::array::from_fn(|k| ((idx / density.pow(3 - k as u32)) % density) as i64);
            ConnectionVector::new(digits.map(|d| Scalar::ratio(d, step))).expect("grid inside [0, 1/2]")
        })
        .collect()
}

fn check_counterexample(eps: &ConnectionVector, tally: &mut WitnessTally) -> Result<(), Box<NoforcingFailure>> {
    let fail = |p: Option<&OutcomeVector>, reason: String| {
        Box::new(NoforcingFailure { eps: eps.clone(), p: p.cloned(), reason })
    };
    let p = noforcing_counterexample(eps).map_err(|e| fail(None, e.to_string()))?;
    if !compatible(&p, eps) {
        return Err(fail(Some(&p), "closed form reports incompatible".into()));
    }
    match lp_verdict(&joint_specs(&p, eps), None, tally) {
        Ok(true) => {}
        Ok(false) => return Err(fail(Some(&p), "LP reports infeasible".into())),
        Err(e) => return Err(fail(Some(&p), e.to_string())),
    }
    let class = qm_compliant(&p);
    if class != QmClass::Outside {
        return Err(fail(Some(&p), format!("cosphericity classifies {class:?}")));
    }
    Ok(())
}

fn check_forcing(eps: &ConnectionVector, seed: u64, index: u64) -> Vec<NoforcingFailure> {
    (0..FORCING_SAMPLES)
        .filter_map(|k| {
            let p = random_outcome(&mut trial_rng(seed ^ 0x5eed_f0c1, index * FORCING_SAMPLES + k));
            let chain = !compatible(&p, eps) || (chsh_satisfied(&p) && qm_compliant(&p).is_compliant());
            (!chain).then(|| NoforcingFailure {
                eps: eps.clone(),
                p: Some(p),
                reason: "compatible outcome vector breaks CHSH or cosphericity".into(),
            })
        })
        .collect()
}

/// For every grid, random and named connection with `s₀ < 1`, builds an
/// outcome vector that is compatible (closed form and LP) yet violates
/// cosphericity. For connections with `s₀ = 1`, checks on sampled outcome
/// vectors that compatibility implies CHSH, which implies cosphericity.
pub fn verify_noforcing(density: usize, seed: u64) -> Result<NoforcingReport, VerifyError> {
    if density < 2 {
        return Err(VerifyError::Density(density));
    }
    let grid = grid_connections(density);
    let random: Vec<_> = (0..NOFORCING_RANDOM).map(|i| random_connection(&mut trial_rng(seed, i))).collect();
    let named = vec![
        ConnectionVector::independent(),
        ConnectionVector::from_ratios([(0, 1), (0, 1), (0, 1), (1, 8)]).expect("valid"),
        ConnectionVector::tsirelson(),
    ];
    let all: Vec<(usize, ConnectionVector)> = grid
        .into_iter()
        .map(|e| (0, e))
        .chain(random.into_iter().map(|e| (1, e)))
        .chain(named.into_iter().map(|e| (2, e)))
        .collect();

    let results: Vec<_> = all
        .par_iter()
        .enumerate()
        .map(|(index, (source, eps))| {
            let forcing = s_pair_connection(eps).s0 == Scalar::one();
            let mut tally = WitnessTally::default();
            let failures = if forcing {
                check_forcing(eps, seed, index as u64)
            } else {
                check_counterexample(eps, &mut tally).err().map(|f| *f).into_iter().collect()
            };
            (*source, forcing, failures, tally)
        })
        .collect();

    let mut report = NoforcingReport {
        density,
        seed,
        grid_checked: 0,
        random_checked: 0,
        named_checked: 0,
        forcing_checked: 0,
        forcing_samples: 0,
        failures: Vec::new(),
        witnesses: WitnessTally::default(),
        passed: false,
    };
    for (source, forcing, failures, tally) in results {
        if forcing {
            report.forcing_checked += 1;
            report.forcing_samples += FORCING_SAMPLES as usize;
        } else {
            match source {
                0 => report.grid_checked += 1,
                1 => report.random_checked += 1,
                _ => report.named_checked += 1,
            }
        }
        report.failures.extend(failures);
        report.witnesses.merge(&tally);
    }
    report.passed = report.failures.is_empty() && report.witnesses.failures == 0;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureEvidence {
    pub slice: [Scalar; 2],
    pub rays: usize,
    pub points: Vec<BoundaryPoint>,
    pub max_residual: f64,
    /// The least collinear triple among the admissible points.
    pub triple: Option<[BoundaryPoint; 3]>,
    pub determinant: f64,
    /// Only points strictly inside the free square were admissible.
    pub interior_only: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionWitness {
    pub description: String,
    pub p: OutcomeVector,
    pub cosphericity: QmClass,
    pub chsh: bool,
    pub tsirelson: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSummary {
    pub resolution: usize,
    pub cells: usize,
    pub inclusion_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NomatchingReport {
    pub scope: &'static str,
    pub seed: u64,
    pub curvature: CurvatureEvidence,
    /// The same check on a slice whose boundary passes through the interior
    /// of the free square.
    pub supplementary_curvature: CurvatureEvidence,
    pub witnesses: Vec<InclusionWitness>,
    pub grid: GridSummary,
    pub passed: bool,
}

pub const NOMATCHING_SCOPE: &str = "Property-level evidence only: the cosphericity boundary is curved (three \
    non-collinear boundary points on a slice), so the QM-compliant set is not a polytope, and the CHSH, \
    cosphericity and Tsirelson regions are strictly nested. The statement over all possible sets of imposed \
    marginals is not checked.";

/// Evenly spaced rays traced from an interior point.
pub const NOMATCHING_RAYS: usize = 64;
/// Additional rays in seeded random directions.
pub const NOMATCHING_RANDOM_RAYS: usize = 16;
pub const NOMATCHING_GRID: usize = 201;
/// Smallest `|determinant|` accepted as non-collinear.
pub const COLLINEARITY_THRESHOLD: f64 = 1e-3;

fn curvature(p11: &Scalar, p12: &Scalar, seed: u64, interior_only: bool) -> Result<CurvatureEvidence, VerifyError> {
    let slice = Slice::with_first_row(p11.clone(), p12.clone())?;
    let mut rng = trial_rng(seed, u64::MAX);
    let directions: Vec<f64> = (0..NOMATCHING_RAYS)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / NOMATCHING_RAYS as f64)
        .chain((0..NOMATCHING_RANDOM_RAYS).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)))
        .collect();
    let points = trace_boundary_along(Region::Qm, &slice, &directions)?;
    let max_residual = points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let admissible: Vec<_> = points.iter().filter(|p| !interior_only || !p.on_face).cloned().collect();
    let (triple, determinant) = match least_collinear_triple(&admissible) {
        Some(([a, b, c], det)) => (Some([admissible[a].clone(), admissible[b].clone(), admissible[c].clone()]), det),
        None => (None, 0.0),
    };
    Ok(CurvatureEvidence {
        slice: [p11.clone(), p12.clone()],
        rays: directions.len(),
        passed: triple.is_some() && determinant > COLLINEARITY_THRESHOLD && max_residual <= BOUNDARY_TOLERANCE,
        points,
        max_residual,
        triple,
        determinant,
        interior_only,
    })
}

fn inclusion_witness(description: &str, p: OutcomeVector, want_qm: bool, want_chsh: bool) -> InclusionWitness {
    let cosphericity = qm_compliant(&p);
    let chsh = chsh_satisfied(&p);
    let tsirelson = tsirelson_satisfied(&p);
    InclusionWitness {
        description: description.to_string(),
        passed: cosphericity.is_compliant() == want_qm && chsh == want_chsh && tsirelson,
        p,
        cosphericity,
        chsh,
        tsirelson,
    }
}

/// Boundary curvature of the cosphericity region on the slice `(p11, p12)`
/// and on a fixed non-degenerate slice, strict-inclusion witnesses, and the
/// inclusion chain on a 201 × 201 grid of the slice.
pub fn verify_nomatching(p11: &Scalar, p12: &Scalar, seed: u64) -> Result<NomatchingReport, VerifyError> {
    let open = |v: &Scalar| v.signum_tol(0.0).is_gt() && (v - &Scalar::half()).signum_tol(0.0).is_lt();
    if !open(p11) || !open(p12) {
        return Err(VerifyError::DegenerateSlice(p11.to_string(), p12.to_string()));
    }
    let main = curvature(p11, p12, seed, false)?;
    let sixteenth = Scalar::ratio(1, 16);
    let supplementary = curvature(&sixteenth, &sixteenth, seed, true)?;

    let witnesses = vec![
        inclusion_witness(
            "QM-compliant but violates CHSH: alpha = (0, pi/2), beta = (pi/4, -pi/4)",
            qm_outcomes(&angle_example_settings()),
            true,
            false,
        ),
        inclusion_witness(
            "satisfies Tsirelson but violates cosphericity: r = (1, 1, sqrt2 - 1, 1 - sqrt2)",
            tsirelson_not_qm_witness(),
            false,
            false,
        ),
    ];

    let grid = membership_grid(&Slice::with_first_row(p11.clone(), p12.clone())?, NOMATCHING_GRID)?;
    let grid = GridSummary {
        resolution: grid.resolution,
        cells: grid.cells.len(),
        inclusion_failures: grid.inclusion_failures.len(),
    };
    Ok(NomatchingReport {
        scope: NOMATCHING_SCOPE,
        seed,
        passed: main.passed
            && supplementary.passed
            && witnesses.iter().all(|w| w.passed)
            && grid.inclusion_failures == 0,
        curvature: main,
        supplementary_curvature: supplementary,
        witnesses,
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "suite", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Lemma1(Lemma1Report),
    Fine(FineReport),
    E0(E0Report),
    Tsirelson(TsirelsonReport),
    Noforcing(NoforcingReport),
    Nomatching(NomatchingReport),
}

impl Report {
    pub fn passed(&self) -> bool {
        match self {
            Report::Lemma1(r) => r.passed,
            Report::Fine(r) => r.passed,
            Report::E0(r) => r.passed,
            Report::Tsirelson(r) => r.passed,
            Report::Noforcing(r) => r.passed,
            Report::Nomatching(r) => r.passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub reports: Vec<Report>,
}

pub const DEFAULT_DENSITY: usize = 6;

/// Every suite, with `trials` samples for the sampled ones, grid density
/// [`DEFAULT_DENSITY`] and the slice `(1/4, 1/4)`.
pub fn verify_all(trials: u64, seed: u64) -> SuiteReport {
    let quarter = Scalar::ratio(1, 4);
    let reports = vec![
        Report::Lemma1(verify_lemma1(trials, seed)),
        Report::Fine(verify_fine(trials, seed)),
        Report::E0(verify_e0(trials, seed)),
        Report::Tsirelson(verify_tsirelson(trials, seed)),
        Report::Noforcing(verify_noforcing(DEFAULT_DENSITY, seed).expect("default density is valid")),
        Report::Nomatching(verify_nomatching(&quarter, &quarter, seed).expect("quarter slice is valid")),
    ];
    SuiteReport { passed: reports.iter().all(Report::passed), reports }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<_> = (0..4).map(|i| random_outcome(&mut trial_rng(7, i))).collect();
        let b: Vec<_> = (0..4).map(|i| random_outcome(&mut trial_rng(7, i))).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
        assert_eq!(verify_lemma1(20, 3), verify_lemma1(20, 3));
    }

    #[test]
    fn lemma1_small_run_agrees() {
        let r = verify_lemma1(200, 1);
        assert!(r.passed, "{:?}", r.disagreements);
        assert_eq!(r.agreements, 200);
        assert_eq!(r.witnesses.checked as u64, r.compatible);
    }

    #[test]
    fn corrupted_criterion_is_caught() {
        let corrupted = |p: &OutcomeVector, e: &ConnectionVector| {
            let (sp, se) = (crate::stats::s_pair_outcome(p), s_pair_connection(e));
            // Drops the second inequality.
            (&se.s0 + &sp.s1).compare(&Scalar::ratio(3, 2)).unwrap().is_le()
        };
        let r = verify_lemma1_with(300, 1, corrupted);
        assert!(!r.passed);
        assert!(!r.disagreements.is_empty());
    }

    #[test]
    fn zero_trials_give_empty_reports() {
        let r = verify_lemma1(0, 9);
        assert_eq!((r.trials, r.agreements, r.disagreements.len()), (0, 0, 0));
        assert!(verify_fine(0, 9).passed);
    }

    #[test]
    fn fine_and_e0() {
        let f = verify_fine(500, 2);
        assert!(f.passed && f.pr_box_incompatible_with_all && f.uniform_compatible_with_all);
        let e = verify_e0(20, 2);
        assert!(e.passed && e.statistics_exact);
        assert_eq!(e.members.len(), 8);
    }

    #[test]
    fn tsirelson_suite() {
        let r = verify_tsirelson(300, 4);
        assert!(r.passed, "{r:?}");
        assert_eq!(r.support, Some("(1+sqrt2)/2".parse().unwrap()));
    }

    #[test]
    fn noforcing_small_grid() {
        let r = verify_noforcing(3, 5).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        // Of the 81 grid points only the eight null-class members have s0 = 1.
        assert_eq!(r.grid_checked, 73);
        assert!(r.forcing_checked >= 8);
        assert_eq!(r.named_checked, 3);
        assert_eq!(verify_noforcing(1, 5).unwrap_err(), VerifyError::Density(1));
    }

    #[test]
    fn nomatching_rejects_cube_boundary() {
        let half = Scalar::half();
        assert!(matches!(verify_nomatching(&half, &Scalar::ratio(1, 4), 0), Err(VerifyError::DegenerateSlice(..))));
    }
}
