//! Two-dimensional slices of the outcome cube `[0, 1/2]⁴`: membership grids
//! for the CHSH, cosphericity and Tsirelson regions, and boundary tracing by
//! bisection along rays.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, OutcomeVector};
use crate::scalar::Scalar;
use crate::stats::{chsh_satisfied, qm_compliant, tsirelson_satisfied};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
    #[error("grid resolution {0} is below the minimum of 2")]
    Resolution(usize),
    #[error("the {0} region has no interior point on this slice")]
    Empty(Region),
    #[error("unknown region `{0}` (expected chsh, qm or tsirelson)")]
    UnknownRegion(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Chsh,
    Qm,
    Tsirelson,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Chsh, Region::Qm, Region::Tsirelson];

    /// Exact membership (boundary included).
    pub fn contains(self, p: &OutcomeVector) -> bool {
        match self {
            Region::Chsh => chsh_satisfied(p),
            Region::Qm => qm_compliant(p).is_compliant(),
            Region::Tsirelson => tsirelson_satisfied(p),
        }
    }

    /// Signed slack in floating point: positive inside, zero on the
    /// boundary, negative outside. For the linear regions it is the distance
    /// of the closest CHSH expression to its nearer bound.
    pub fn margin(self, p: &[f64; 4]) -> f64 {
        let (lo, hi) = match self {
            Region::Chsh => (0.0, 1.0),
            Region::Tsirelson => ((1.0 - std::f64::consts::SQRT_2) / 2.0, (1.0 + std::f64::consts::SQRT_2) / 2.0),
            Region::Qm => {
                let r = p.map(|x| 4.0 * x - 1.0);
                let root = |a: f64, b: f64| ((1.0 - a * a).max(0.0) * (1.0 - b * b).max(0.0)).sqrt();
                return root(r[0], r[1]) + root(r[2], r[3]) - (r[0] * r[1] - r[2] * r[3]).abs();
            }
        };
        let total: f64 = p.iter().sum();
        p.iter().map(|x| total - 2.0 * x).map(|e| (e - lo).min(hi - e)).fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Chsh => "chsh",
            Region::Qm => "qm",
            Region::Tsirelson => "tsirelson",
        })
    }
}

impl FromStr for Region {
    type Err = RegionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chsh" => Ok(Region::Chsh),
            "qm" => Ok(Region::Qm),
            "tsirelson" => Ok(Region::Tsirelson),
            _ => Err(RegionError::UnknownRegion(s.to_string())),
        }
    }
}

/// Two components of `p` (indices into `p11, p12, p21, p22`) held fixed; the
/// other two, in increasing index order, are the free `x` and `y` axes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Slice {
    fixed_axes: [usize; 2],
    fixed_values: [Scalar; 2],
}

impl Slice {
    pub fn new(fixed_axes: [usize; 2], fixed_values: [Scalar; 2]) -> Result<Self, RegionError> {
        if fixed_axes[0] >= 4 || fixed_axes[1] >= 4 || fixed_axes[0] == fixed_axes[1] {
            return Err(RegionError::InvalidSlice(format!("axes {fixed_axes:?} must be two distinct indices below 4")));
        }
        for v in &fixed_values {
            if v.signum_tol(0.0).is_lt() || (v - &Scalar::half()).signum_tol(0.0).is_gt() {
                return Err(RegionError::InvalidSlice(format!("fixed value {v} is outside [0, 1/2]")));
            }
        }
        Ok(Slice { fixed_axes, fixed_values })
    }

    /// The slice with `p11` and `p12` fixed, free axes `p21` and `p22`.
    pub fn with_first_row(p11: Scalar, p12: Scalar) -> Result<Self, RegionError> {
        Self::new([0, 1], [p11, p12])
    }

    pub fn fixed_axes(&self) -> [usize; 2] {
        self.fixed_axes
    }

    pub fn fixed_values(&self) -> &[Scalar; 2] {
        &self.fixed_values
    }

    pub fn free_axes(&self) -> [usize; 2] {
        let mut free = (0..4).filter(|k| !self.fixed_axes.contains(k));
        [free.next().unwrap(), free.next().unwrap()]
    }

    pub fn point(&self, x: Scalar, y: Scalar) -> Result<OutcomeVector, ModelError> {
        let mut comps: [Scalar; 4] = std::array::from_fn(|_| Scalar::zero());
        for (axis, v) in self.fixed_axes.iter().zip(&self.fixed_values) {
            comps[*axis] = v.clone();
        }
        let [fx, fy] = self.free_axes();
        comps[fx] = x;
        comps[fy] = y;
        OutcomeVector::new(comps)
    }

    fn point_f64(&self, x: f64, y: f64) -> [f64; 4] {
        let mut comps = [0.0; 4];
        for (axis, v) in self.fixed_axes.iter().zip(&self.fixed_values) {
            comps[*axis] = v.to_f64();
        }
        let [fx, fy] = self.free_axes();
        comps[fx] = x;
        comps[fy] = y;
        comps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub chsh: bool,
    pub qm: bool,
    pub tsirelson: bool,
}

impl Membership {
    pub fn of(p: &OutcomeVector) -> Self {
        Membership {
            chsh: Region::Chsh.contains(p),
            qm: Region::Qm.contains(p),
            tsirelson: Region::Tsirelson.contains(p),
        }
    }

    /// CHSH ⊆ cosphericity ⊆ Tsirelson at this point.
    pub fn nested(&self) -> bool {
        (!self.chsh || self.qm) && (!self.qm || self.tsirelson)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub x: Scalar,
    pub y: Scalar,
    #[serde(flatten)]
    pub membership: Membership,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub slice: Slice,
    pub resolution: usize,
    /// Row-major: cell `(i, j)` at index `i * resolution + j` has `x` from
    /// column `i` and `y` from column `j`.
    pub cells: Vec<Cell>,
    /// Indices of cells where the inclusion chain fails.
    pub inclusion_failures: Vec<usize>,
}

pub const CSV_HEADER: &str = "free_x,free_y,chsh,qm,tsirelson";

impl Grid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.resolution + j]
    }

    pub fn inclusion_holds(&self) -> bool {
        self.inclusion_failures.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for c in &self.cells {
            let m = c.membership;
            writeln!(out, "{},{},{},{},{}", c.x.to_f64(), c.y.to_f64(), m.chsh as u8, m.qm as u8, m.tsirelson as u8)?;
        }
        Ok(())
    }
}

/// Cell centers `(2k + 1) / (4 · resolution)`, `k = 0 .. resolution`.
pub fn cell_centers(resolution: usize) -> Vec<Scalar> {
    (0..resolution as i64).map(|k| Scalar::ratio(2 * k + 1, 4 * resolution as i64)).collect()
}

pub fn membership_grid(slice: &Slice, resolution: usize) -> Result<Grid, RegionError> {
    if resolution < 2 {
        return Err(RegionError::Resolution(resolution));
    }
    let centers = cell_centers(resolution);
    let cells = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (centers[idx / resolution].clone(), centers[idx % resolution].clone());
            let p = slice.point(x.clone(), y.clone())?;
            Ok(Cell { x, y, membership: Membership::of(&p) })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let inclusion_failures = cells.iter().enumerate().filter(|(_, c)| !c.membership.nested()).map(|(i, _)| i).collect();
    Ok(Grid { slice: slice.clone(), resolution, cells, inclusion_failures })
}

/// `region_<p11>_<p12>_<res>.csv`.
pub fn region_file_name(p11: f64, p12: f64, resolution: usize) -> String {
    format!("region_{p11}_{p12}_{resolution}.csv")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
    pub p: [f64; 4],
    /// Direction of the ray, radians.
    pub direction: f64,
    /// The point lies where the ray meets the edge of the square.
    pub on_face: bool,
    /// `|margin|` at the point.
    pub residual: f64,
}

/// Margins within this are treated as on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

const INTERIOR_SEARCH: usize = 41;

/// A point of the free square strictly inside `region`: the center if it
/// qualifies, otherwise the coarse-grid point with the largest margin.
pub fn interior_point(region: Region, slice: &Slice) -> Result<(f64, f64), RegionError> {
    if region.margin(&slice.point_f64(0.25, 0.25)) > BOUNDARY_TOLERANCE {
        return Ok((0.25, 0.25));
    }
    let step = 0.5 / (INTERIOR_SEARCH - 1) as f64;
    let mut best = (f64::NEG_INFINITY, (0.0, 0.0));
    for i in 0..INTERIOR_SEARCH {
        for j in 0..INTERIOR_SEARCH {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let m = region.margin(&slice.point_f64(x, y));
            if m > best.0 {
                best = (m, (x, y));
            }
        }
    }
    if best.0 > BOUNDARY_TOLERANCE {
        Ok(best.1)
    } else {
        Err(RegionError::Empty(region))
    }
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else if (v - 0.5).abs() < 1e-12 {
        0.5
    } else {
        v.clamp(0.0, 0.5)
    }
}

/// Boundary of `region` along one ray from `origin`, or `None` when the ray
/// reaches the edge of the square strictly inside the region.
pub fn trace_ray(region: Region, slice: &Slice, origin: (f64, f64), direction: f64) -> Option<BoundaryPoint> {
    let (dy, dx) = direction.sin_cos();
    let reach = |o: f64, d: f64| {
        if d > 1e-15 {
            (0.5 - o) / d
        } else if d < -1e-15 {
            -o / d
        } else {
            f64::INFINITY
        }
    };
    let t_max = reach(origin.0, dx).min(reach(origin.1, dy));
    let at = |t: f64| (snap(origin.0 + t * dx), snap(origin.1 + t * dy));
    let margin = |t: f64| {
        let (x, y) = at(t);
        region.margin(&slice.point_f64(x, y))
    };
    let make = |t: f64, on_face: bool| {
        let (x, y) = at(t);
        let p = slice.point_f64(x, y);
        BoundaryPoint { x, y, p, direction, on_face, residual: region.margin(&p).abs() }
    };

    let end = margin(t_max);
    if end.abs() <= BOUNDARY_TOLERANCE {
        return Some(make(t_max, true));
    }
    if end > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if margin(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(make(lo, false))
}

/// Boundary points along `rays` evenly spaced directions `2πk / rays` from an
/// interior point of the region.
pub fn trace_boundary(region: Region, slice: &Slice, rays: usize) -> Result<Vec<BoundaryPoint>, RegionError> {
    let directions: Vec<f64> = (0..rays).map(|k| 2.0 * std::f64::consts::PI * k as f64 / rays as f64).collect();
    trace_boundary_along(region, slice, &directions)
}

pub fn trace_boundary_along(
    region: Region,
    slice: &Slice,
    directions: &[f64],
) -> Result<Vec<BoundaryPoint>, RegionError> {
    let origin = interior_point(region, slice)?;
    Ok(directions.par_iter().filter_map(|&d| trace_ray(region, slice, origin, d)).collect())
}

/// Twice the signed area of the triangle `a b c`.
pub fn collinearity_determinant(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Indices of the three points with the largest `|determinant|`, and that
/// value; `None` for fewer than three points.
pub fn least_collinear_triple(points: &[BoundaryPoint]) -> Option<([usize; 3], f64)> {
    let n = points.len();
    let mut best: Option<([usize; 3], f64)> = None;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (pa, pb, pc) = (&points[a], &points[b], &points[c]);
                let det = collinearity_determinant((pa.x, pa.y), (pb.x, pb.y), (pc.x, pc.y)).abs();
                if best.is_none_or(|(_, d)| det > d) {
                    best = Some(([a, b, c], det));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice(a: (i64, i64), b: (i64, i64)) -> Slice {
        Slice::with_first_row(Scalar::ratio(a.0, a.1), Scalar::ratio(b.0, b.1)).unwrap()
    }

    #[test]
    fn quarter_slice_grid() {
        let s = slice((1, 4), (1, 4));
        let g = membership_grid(&s, 201).unwrap();
        assert!(g.inclusion_holds());
        let center = g.cell(100, 100);
        assert_eq!((center.x.clone(), center.y.clone()), (Scalar::ratio(1, 4), Scalar::ratio(1, 4)));
        assert_eq!(center.membership, Membership { chsh: true, qm: true, tsirelson: true });
        for i in 0..201 {
            for j in 0..201 {
                assert_eq!(g.cell(i, j).membership, g.cell(j, i).membership);
            }
        }
    }

    #[test]
    fn degenerate_slice_is_valid() {
        let g = membership_grid(&slice((1, 2), (1, 2)), 21).unwrap();
        assert!(g.inclusion_holds());
        assert_eq!(g.cells.len(), 441);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Slice::with_first_row(Scalar::ratio(3, 4), Scalar::zero()).is_err());
        assert!(Slice::new([1, 1], [Scalar::zero(), Scalar::zero()]).is_err());
        assert_eq!(membership_grid(&slice((1, 4), (1, 4)), 1).unwrap_err(), RegionError::Resolution(1));
    }

    #[test]
    fn csv_layout() {
        let g = membership_grid(&slice((1, 4), (1, 4)), 2).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "free_x,free_y,chsh,qm,tsirelson");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0.125,0.125,1,1,1");
        assert_eq!(region_file_name(0.25, 0.25, 201), "region_0.25_0.25_201.csv");
    }

    #[test]
    fn flat_slice_has_no_chsh_interior() {
        // p11 = 1/2, p12 = 0 confines the CHSH region to the line x + y = 1/2.
        assert_eq!(
            trace_boundary(Region::Chsh, &slice((1, 2), (0, 1)), 4).unwrap_err(),
            RegionError::Empty(Region::Chsh)
        );
    }

    #[test]
    fn chsh_boundary_lies_on_a_face() {
        for s in [slice((1, 16), (1, 16)), slice((1, 8), (3, 8)), slice((1, 8), (1, 4))] {
            let pts = trace_boundary(Region::Chsh, &s, 24).unwrap();
            assert!(!pts.is_empty());
            for pt in pts {
                assert!(pt.residual < 1e-12, "{pt:?}");
            }
        }
    }

    #[test]
    fn single_ray() {
        let pts = trace_boundary(Region::Chsh, &slice((1, 16), (1, 16)), 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].residual < 1e-12);
    }

    #[test]
    fn curved_boundary_points_are_not_collinear() {
        let s = slice((1, 16), (1, 16));
        let pts: Vec<_> = trace_boundary(Region::Qm, &s, 64).unwrap().into_iter().filter(|p| !p.on_face).collect();
        assert!(pts.len() >= 3);
        for p in &pts {
            assert!(p.residual < 1e-9, "{p:?}");
        }
        let (_, det) = least_collinear_triple(&pts).unwrap();
        assert!(det > 1e-3);
    }
}
