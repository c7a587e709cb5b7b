//! Singlet-state predictions from the cosine law
//! `p_ij = 1/4 − cos(α_i, β_j)/4`, and a numerical search for the largest
//! CHSH excess over planar settings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::OutcomeVector;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmError {
    #[error("cannot parse angle `{0}`")]
    Angle(String),
    #[error("measurement axis {0} is the zero vector")]
    ZeroVector(usize),
    #[error("measurement axis {0} has a non-finite component")]
    NonFinite(usize),
    #[error("grid resolution {0} is below the minimum of 8")]
    Resolution(usize),
}

/// A planar axis direction.
#[derive(Clone, Debug, PartialEq)]
pub enum Angle {
    /// `q·π` for rational `q`.
    PiMultiple(Rational),
    Radians(f64),
}

impl Angle {
    pub fn pi_fraction(numer: i64, denom: i64) -> Self {
        Angle::PiMultiple(Rational::new(numer, denom))
    }

    pub fn radians(&self) -> f64 {
        match self {
            Angle::PiMultiple(q) => q.to_f64() * PI,
            Angle::Radians(x) => *x,
        }
    }

    fn minus(&self, other: &Angle) -> Angle {
        match (self, other) {
            (Angle::PiMultiple(a), Angle::PiMultiple(b)) => Angle::PiMultiple(a - b),
            _ => Angle::Radians(self.radians() - other.radians()),
        }
    }

    fn plus(&self, other: &Angle) -> Angle {
        match (self, other) {
            (Angle::PiMultiple(a), Angle::PiMultiple(b)) => Angle::PiMultiple(a + b),
            _ => Angle::Radians(self.radians() + other.radians()),
        }
    }
}

/// `cos(qπ)`, exact when it lies in ℚ(√2).
fn cos_pi_multiple(q: &Rational) -> Scalar {
    let two = Rational::from_integer(2);
    let turns = Rational::from_bigints((q / &two).floor(), 1.into()).expect("unit denominator");
    let t = q - &(&turns * &two);
    let eighths = &t * &Rational::from_integer(4);
    let sixths = &t * &Rational::from_integer(3);
    let half_root = Scalar::quadratic(Rational::zero(), Rational::new(1, 2));
    if eighths.is_integer() {
        match eighths.floor().to_u8() {
            Some(0) => Scalar::one(),
            Some(1) | Some(7) => half_root,
            Some(2) | Some(6) => Scalar::zero(),
            Some(3) | Some(5) => -half_root,
            _ => -Scalar::one(),
        }
    } else if sixths.is_integer() {
        match sixths.floor().to_u8() {
            Some(1) | Some(5) => Scalar::half(),
            _ => -Scalar::half(),
        }
    } else {
        Scalar::approx((q.to_f64() * PI).cos())
    }
}

impl Angle {
    /// Cosine of this angle.
    pub fn cos(&self) -> Scalar {
        match self {
            Angle::PiMultiple(q) => cos_pi_multiple(q),
            Angle::Radians(x) => Scalar::approx(x.cos()),
        }
    }
}

impl FromStr for Angle {
    type Err = QmError;

    /// Accepts `pi/4`, `-3*pi/4`, `3pi/4`, `π/2`, `0`, and radians such as
    /// `0.7853981`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || QmError::Angle(s.to_string());
        let text = s.trim();
        if text.contains("pi") || text.contains('π') {
            let coefficient: Scalar = text.replace("pi", "(1)").replace('π', "(1)").parse().map_err(|_| err())?;
            return Ok(match coefficient.as_rational() {
                Some(q) => Angle::PiMultiple(q.clone()),
                None => Angle::Radians(coefficient.to_f64() * PI),
            });
        }
        let value: Scalar = text.parse().map_err(|_| err())?;
        if value.is_exact() && value.is_zero() {
            Ok(Angle::PiMultiple(Rational::zero()))
        } else if value.to_f64().is_finite() {
            Ok(Angle::Radians(value.to_f64()))
        } else {
            Err(err())
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiMultiple(q) if q.is_zero() => write!(f, "0"),
            Angle::PiMultiple(q) => {
                let (n, d) = (q.numer(), q.denom());
                let coeff = match n.to_i64() {
                    Some(1) => String::new(),
                    Some(-1) => "-".to_string(),
                    _ => format!("{n}*"),
                };
                if d == 1.into() {
                    write!(f, "{coeff}pi")
                } else {
                    write!(f, "{coeff}pi/{d}")
                }
            }
            Angle::Radians(x) => write!(f, "{x:?}"),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Measurement axes `α₁, α₂` (first particle) and `β₁, β₂` (second).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Settings {
    Planar([Angle; 4]),
    Vectors([[f64; 3]; 4]),
}

impl Settings {
    /// Normalizes the four axes to unit length.
    pub fn vectors(axes: [[f64; 3]; 4]) -> Result<Self, QmError> {
        let mut out = axes;
        for (k, v) in out.iter_mut().enumerate() {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(QmError::NonFinite(k));
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(QmError::ZeroVector(k));
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(Settings::Vectors(out))
    }

    /// Cosine between `α_i` and `β_j`, `i, j` in {1, 2}.
    pub fn cosine(&self, i: usize, j: usize) -> Scalar {
        match self {
            Settings::Planar(a) => a[i - 1].minus(&a[j + 1]).cos(),
            Settings::Vectors(v) => {
                Scalar::approx(v[i - 1].iter().zip(&v[j + 1]).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0))
            }
        }
    }

    /// The same planar settings turned by `offset`.
    pub fn rotated(&self, offset: &Angle) -> Settings {
        match self {
            Settings::Planar(a) => Settings::Planar(std::array::from_fn(|k| a[k].plus(offset))),
            Settings::Vectors(v) => {
                let (s, c) = offset.radians().sin_cos();
                Settings::Vectors(v.map(|[x, y, z]| [c * x - s * y, s * x + c * y, z]))
            }
        }
    }
}

/// Outcome vector predicted for the singlet state.
pub fn qm_outcomes(settings: &Settings) -> OutcomeVector {
    let quarter = Scalar::ratio(1, 4);
    let comps: [Scalar; 4] = std::array::from_fn(|k| {
        let cos = settings.cosine(k / 2 + 1, k % 2 + 1);
        let p = &quarter - &(&quarter * &cos);
        match p {
            // Rounding may leave [0, 1/2] by an ulp.
            Scalar::Approx(x) => Scalar::approx(x.clamp(0.0, 0.5)),
            exact => exact,
        }
    });
    OutcomeVector::new(comps).expect("cosine law stays within [0, 1/2]")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshMaximum {
    pub settings: Settings,
    /// `1/2 + max_ij |Σp − 2p_ij − 1/2|`, the largest CHSH expression after
    /// reflecting the lower face onto the upper.
    pub value: Scalar,
}

/// `max_ij |Σp − 2p_ij − 1/2|` for planar radians `[α₁, α₂, β₁, β₂]`.
fn excess(angles: &[f64; 4]) -> f64 {
    let p: [f64; 4] = std::array::from_fn(|k| 0.25 - 0.25 * (angles[k / 2] - angles[2 + k % 2]).cos());
    let total: f64 = p.iter().sum();
    p.iter().map(|x| (total - 2.0 * x - 0.5).abs()).fold(0.0, f64::max)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GOLDEN_STEPS: usize = 60;

/// Golden-section maximization of coordinate `k` over `[x − h, x + h]`.
fn golden_coordinate(angles: &mut [f64; 4], k: usize, h: f64) {
    let at = |angles: &[f64; 4], x: f64| {
        let mut a = *angles;
        a[k] = x;
        excess(&a)
    };
    let (mut lo, mut hi) = (angles[k] - h, angles[k] + h);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (at(angles, x1), at(angles, x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = at(angles, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = at(angles, x1);
        }
    }
    let (x, f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if f > excess(angles) {
        angles[k] = x;
    }
}

/// Grid search over planar settings with `α₁ = 0` (the prediction depends
/// only on angle differences) and the other three angles at multiples of
/// `2π / resolution`, then `refine` rounds of coordinate-wise golden-section
/// search, each round halving the bracket.
pub fn maximize_chsh(resolution: usize, refine: usize) -> Result<ChshMaximum, QmError> {
    if resolution < 8 {
        return Err(QmError::Resolution(resolution));
    }
    let step = 2.0 * PI / resolution as f64;
    let res = resolution;
    let (best_index, _) = (0..res * res * res)
        .into_par_iter()
        .map(|idx| {
            let a =
                [0.0, (idx / (res * res)) as f64 * step, ((idx / res) % res) as f64 * step, (idx % res) as f64 * step];
            (idx, excess(&a))
        })
        .reduce(|| (usize::MAX, f64::NEG_INFINITY), |x, y| if y.1 > x.1 || (y.1 == x.1 && y.0 < x.0) { y } else { x });

    let grid = [best_index / (res * res), (best_index / res) % res, best_index % res];
    let mut angles = [0.0, grid[0] as f64 * step, grid[1] as f64 * step, grid[2] as f64 * step];
    let mut h = step;
    for _ in 0..refine {
        for k in 1..4 {
            golden_coordinate(&mut angles, k, h);
        }
        h /= 2.0;
    }

    let settings = if refine == 0 {
        Settings::Planar([
            Angle::PiMultiple(Rational::zero()),
            Angle::pi_fraction(2 * grid[0] as i64, res as i64),
            Angle::pi_fraction(2 * grid[1] as i64, res as i64),
            Angle::pi_fraction(2 * grid[2] as i64, res as i64),
        ])
    } else {
        Settings::Planar(angles.map(Angle::Radians))
    };
    Ok(ChshMaximum { settings, value: Scalar::approx(0.5 + excess(&angles)) })
}
