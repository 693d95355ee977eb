//! Radial basis function interpolation over point and segment centers.
//!
//! The interpolant is `s(x) = sum_i w_i * phi(d_i(x))` where `d_i` is the
//! Euclidean distance for a point center and the point-to-segment distance
//! for a segment center. Weights come from the dense system `A w = f` with
//! `A[j][i] = phi(d(center_j, center_i)) + lambda * [i == j]`, where the
//! center-to-center distance dispatches on the kinds of the two centers.

mod model_io;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

pub use model_io::{read_model, write_model};

use crate::distance;
use crate::error::{Error, Result};
use crate::mesh::{CenterSegment, NodalValue};
use crate::Point3;

/// Inverse multiquadric.
pub const DEFAULT_BASIS: BasisKind = BasisKind::InverseMultiquadric;
pub const DEFAULT_SHAPE: f64 = 0.1;

/// Absolute distance under which two centers of the same kind coincide.
pub const COINCIDENCE_TOL: f64 = 1e-12;
/// Relative pivot magnitude (times max |A|) under which the system is singular.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Gaussian,
    Multiquadric,
    InverseMultiquadric,
    ThinPlateSpline,
}

impl BasisKind {
    pub const ALL: [BasisKind; 4] = [
        BasisKind::Gaussian,
        BasisKind::Multiquadric,
        BasisKind::InverseMultiquadric,
        BasisKind::ThinPlateSpline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Gaussian => "gaussian",
            BasisKind::Multiquadric => "mq",
            BasisKind::InverseMultiquadric => "imq",
            BasisKind::ThinPlateSpline => "tps",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(BasisKind::Gaussian),
            "mq" | "multiquadric" => Ok(BasisKind::Multiquadric),
            "imq" | "inverse-multiquadric" => Ok(BasisKind::InverseMultiquadric),
            "tps" | "thin-plate-spline" => Ok(BasisKind::ThinPlateSpline),
            other => Err(Error::InvalidParameter(format!("unknown basis '{other}'"))),
        }
    }
}

/// A basis kind together with its shape parameter `c` (ignored by TPS).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    kind: BasisKind,
    shape: f64,
}

impl Basis {
    pub fn new(kind: BasisKind, shape: f64) -> Result<Self> {
        if kind != BasisKind::ThinPlateSpline && !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shape parameter must be positive and finite, got {shape}"
            )));
        }
        Ok(Self { kind, shape })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let c = self.shape;
        match self.kind {
            BasisKind::Gaussian => (-(c * r) * (c * r)).exp(),
            BasisKind::Multiquadric => (r * r + c * c).sqrt(),
            BasisKind::InverseMultiquadric => 1.0 / (r * r + c * c).sqrt(),
            BasisKind::ThinPlateSpline => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
        }
    }
}

impl Default for Basis {
    fn default() -> Self {
        Self {
            kind: DEFAULT_BASIS,
            shape: DEFAULT_SHAPE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Mode {
    Isotropic,
    #[default]
    Anisotropic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Isotropic => "iso",
            Mode::Anisotropic => "aniso",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iso" | "isotropic" => Ok(Mode::Isotropic),
            "aniso" | "anisotropic" => Ok(Mode::Anisotropic),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterpolationCenter {
    Point(NodalValue),
    Segment(CenterSegment),
}

impl InterpolationCenter {
    pub fn value(&self) -> f64 {
        match self {
            InterpolationCenter::Point(p) => p.value,
            InterpolationCenter::Segment(s) => s.value,
        }
    }

    /// Distance from an arbitrary point to this center.
    #[inline]
    pub fn distance_to(&self, x: &Point3) -> f64 {
        match self {
            InterpolationCenter::Point(p) => distance::point_point(x, &p.position),
            InterpolationCenter::Segment(s) => distance::point_segment(x, &s.a, &s.b),
        }
    }

    fn coincides_with(&self, other: &Self) -> bool {
        use InterpolationCenter::*;
        let close = |p: &Point3, q: &Point3| distance::point_point(p, q) < COINCIDENCE_TOL;
        match (self, other) {
            (Point(p), Point(q)) => close(&p.position, &q.position),
            (Segment(s), Segment(t)) => {
                (close(&s.a, &t.a) && close(&s.b, &t.b)) || (close(&s.a, &t.b) && close(&s.b, &t.a))
            }
            _ => false,
        }
    }

    fn points(&self) -> impl Iterator<Item = Point3> {
        let (first, second) = match self {
            InterpolationCenter::Point(p) => (p.position, None),
            InterpolationCenter::Segment(s) => (s.a, Some(s.b)),
        };
        std::iter::once(first).chain(second)
    }
}

/// Center-to-center distance: Euclidean between points, point-to-segment
/// for mixed pairs, endpoint minimum between segments.
pub fn pairwise_distance(ci: &InterpolationCenter, cj: &InterpolationCenter) -> f64 {
    use InterpolationCenter::*;
    match (ci, cj) {
        (Point(p), Point(q)) => distance::point_point(&p.position, &q.position),
        (Point(p), Segment(s)) | (Segment(s), Point(p)) => {
            distance::point_segment(&p.position, &s.a, &s.b)
        }
        (Segment(s), Segment(t)) => distance::segment_segment(&s.a, &s.b, &t.a, &t.b),
    }
}

/// Builds the interpolation matrix and right-hand side.
///
/// In isotropic mode every center must be a point and plain Euclidean
/// distances are used.
pub fn assemble_matrix(
    centers: &[InterpolationCenter],
    basis: &Basis,
    lambda: f64,
    mode: Mode,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = centers.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no interpolation centers".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularization must be non-negative, got {lambda}"
        )));
    }
    let positions: Vec<Point3> = match mode {
        Mode::Isotropic => centers
            .iter()
            .map(|c| match c {
                InterpolationCenter::Point(p) => Ok(p.position),
                InterpolationCenter::Segment(_) => Err(Error::InvalidParameter(
                    "segment centers require anisotropic mode".into(),
                )),
            })
            .collect::<Result<_>>()?,
        Mode::Anisotropic => Vec::new(),
    };
    for j in 0..n {
        for i in j + 1..n {
            if centers[j].coincides_with(&centers[i]) {
                return Err(Error::DuplicateCenter {
                    first: j,
                    second: i,
                });
            }
        }
    }

    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let d = match mode {
                Mode::Isotropic => distance::point_point(&positions[j], &positions[i]),
                Mode::Anisotropic => pairwise_distance(&centers[j], &centers[i]),
            };
            let phi = basis.eval(d);
            a[(j, i)] = phi;
            a[(i, j)] = phi;
        }
        a[(j, j)] += lambda;
    }
    let rhs = DVector::from_iterator(n, centers.iter().map(InterpolationCenter::value));
    Ok((a, rhs))
}

/// Weights plus diagnostics of the dense solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub weights: DVector<f64>,
    /// `max |A w - rhs|`.
    pub residual: f64,
    /// Ratio of the largest to the smallest LU pivot magnitude.
    pub condition_estimate: f64,
}

/// Solves `A w = rhs` by LU decomposition with partial pivoting.
pub fn solve_weights(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<Solution> {
    if !a.is_square() || a.nrows() != rhs.len() {
        return Err(Error::InvalidParameter(format!(
            "system shape mismatch: {}x{} matrix, {} right-hand sides",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    if a.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "system contains non-finite entries".into(),
        ));
    }
    let max_entry = a.amax();
    let lu = a.clone().lu();
    let pivots = lu.u().diagonal();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;
    for (row, p) in pivots.iter().map(|p| p.abs()).enumerate() {
        if !(p >= PIVOT_TOL * max_entry) || p == 0.0 {
            return Err(Error::SingularMatrix {
                row,
                pivot: p,
                max_entry,
            });
        }
        min_pivot = min_pivot.min(p);
        max_pivot = max_pivot.max(p);
    }
    let singular = |row| Error::SingularMatrix {
        row,
        pivot: 0.0,
        max_entry,
    };

    let mut weights = lu.solve(rhs).ok_or_else(|| singular(0))?;
    let mut residual = (a * &weights - rhs).amax();
    let target = 1e-8 * (1.0 + rhs.amax());
    if residual > target {
        // one step of iterative refinement
        let correction = lu.solve(&(rhs - a * &weights)).ok_or_else(|| singular(0))?;
        let refined = &weights + correction;
        let refined_residual = (a * &refined - rhs).amax();
        if refined_residual < residual {
            weights = refined;
            residual = refined_residual;
        }
    }
    Ok(Solution {
        weights,
        residual,
        condition_estimate: max_pivot / min_pivot,
    })
}

/// A fitted interpolant. Immutable and safe to evaluate from many threads.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationModel {
    centers: Vec<InterpolationCenter>,
    basis: Basis,
    mode: Mode,
    lambda: f64,
    weights: Vec<f64>,
}

impl InterpolationModel {
    pub fn fit(
        centers: Vec<InterpolationCenter>,
        basis: Basis,
        mode: Mode,
        lambda: f64,
    ) -> Result<Self> {
        Self::fit_with_report(centers, basis, mode, lambda).map(|(m, _)| m)
    }

    pub fn fit_with_report(
        centers: Vec<InterpolationCenter>,
        basis: Basis,
        mode: Mode,
        lambda: f64,
    ) -> Result<(Self, Solution)> {
        let (a, rhs) = assemble_matrix(&centers, &basis, lambda, mode)?;
        let solution = solve_weights(&a, &rhs)?;
        let model = Self {
            centers,
            basis,
            mode,
            lambda,
            weights: solution.weights.iter().copied().collect(),
        };
        Ok((model, solution))
    }

    /// Reassembles a model from stored parts.
    pub fn from_parts(
        centers: Vec<InterpolationCenter>,
        basis: Basis,
        mode: Mode,
        lambda: f64,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} centers but {} weights",
                centers.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite weight".into()));
        }
        if mode == Mode::Isotropic
            && centers
                .iter()
                .any(|c| matches!(c, InterpolationCenter::Segment(_)))
        {
            return Err(Error::InvalidParameter(
                "segment centers require anisotropic mode".into(),
            ));
        }
        Ok(Self {
            centers,
            basis,
            mode,
            lambda,
            weights,
        })
    }

    pub fn centers(&self) -> &[InterpolationCenter] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn evaluate(&self, x: &Point3) -> f64 {
        self.centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.basis.eval(c.distance_to(x)))
            .sum()
    }

    /// Bounding box of all center positions and segment endpoints.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let pts: Vec<Point3> = self.centers.iter().flat_map(|c| c.points()).collect();
        crate::mesh::bounding_box(&pts)
    }

    /// True when every center lies in the z = 0 plane.
    pub fn is_planar(&self) -> bool {
        self.centers
            .iter()
            .flat_map(|c| c.points())
            .all(|p| p.z == 0.0)
    }
}
