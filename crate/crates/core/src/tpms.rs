//! Triply periodic minimal surface fields (Schwarz P and D, Schoen gyroid and
//! I-WP) used as regular-scaffold baselines.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{sample_field, FieldSource, VoxelGrid};
use crate::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TpmsSurface {
    P,
    D,
    G,
    Iwp,
}

impl TpmsSurface {
    pub const ALL: [TpmsSurface; 4] = [
        TpmsSurface::P,
        TpmsSurface::D,
        TpmsSurface::G,
        TpmsSurface::Iwp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TpmsSurface::P => "p",
            TpmsSurface::D => "d",
            TpmsSurface::G => "g",
            TpmsSurface::Iwp => "iwp",
        }
    }
}

impl fmt::Display for TpmsSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TpmsSurface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p" | "primitive" => Ok(TpmsSurface::P),
            "d" | "diamond" => Ok(TpmsSurface::D),
            "g" | "gyroid" => Ok(TpmsSurface::G),
            "iwp" | "i-wp" => Ok(TpmsSurface::Iwp),
            other => Err(Error::InvalidParameter(format!(
                "unknown TPMS kind '{other}'"
            ))),
        }
    }
}

/// A TPMS surface with per-axis angular frequency multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpmsKind {
    pub surface: TpmsSurface,
    periods: [f64; 3],
}

impl TpmsKind {
    pub fn new(surface: TpmsSurface) -> Self {
        Self {
            surface,
            periods: [1.0; 3],
        }
    }

    pub fn with_periods(surface: TpmsSurface, periods: [f64; 3]) -> Result<Self> {
        if periods.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "TPMS periods must be positive, got {periods:?}"
            )));
        }
        Ok(Self { surface, periods })
    }

    pub fn periods(&self) -> [f64; 3] {
        self.periods
    }

    pub fn eval(&self, p: &Point3) -> f64 {
        let x = self.periods[0] * p.x;
        let y = self.periods[1] * p.y;
        let z = self.periods[2] * p.z;
        let (sx, cx) = x.sin_cos();
        let (sy, cy) = y.sin_cos();
        let (sz, cz) = z.sin_cos();
        match self.surface {
            TpmsSurface::P => cx + cy + cz,
            TpmsSurface::D => sx * sy * sz + sx * cy * cz + cx * sy * cz + cx * cy * sz,
            TpmsSurface::G => sx * cy + sy * cz + sz * cx,
            TpmsSurface::Iwp => {
                2.0 * (cx * cy + cy * cz + cz * cx)
                    - ((2.0 * x).cos() + (2.0 * y).cos() + (2.0 * z).cos())
            }
        }
    }

    /// Grid covering one period along every axis, `resolution` samples per
    /// axis with both ends included.
    pub fn unit_cell_grid(&self, resolution: usize) -> Result<VoxelGrid> {
        if resolution < 2 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be >= 2, got {resolution}"
            )));
        }
        let spacing = self.periods.map(|p| TAU / p / (resolution - 1) as f64);
        VoxelGrid::new(Point3::origin(), spacing, [resolution; 3])
    }
}

pub fn sample_tpms(kind: TpmsKind, grid: &mut VoxelGrid, workers: usize) {
    sample_field(&FieldSource::Tpms(kind), grid, workers);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::solid_fraction;
    use crate::isosurface::marching_cubes;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn values_at_origin() {
        let o = Point3::origin();
        assert_eq!(TpmsKind::new(TpmsSurface::P).eval(&o), 3.0);
        assert_eq!(TpmsKind::new(TpmsSurface::G).eval(&o), 0.0);
        assert_eq!(TpmsKind::new(TpmsSurface::Iwp).eval(&o), 3.0);
        assert_eq!(TpmsKind::new(TpmsSurface::D).eval(&o), 0.0);
    }

    #[test]
    fn periodic_along_each_axis() {
        let mut rng = StdRng::seed_from_u64(3);
        for surface in TpmsSurface::ALL {
            let kind = TpmsKind::with_periods(surface, [1.0, 2.0, 0.5]).unwrap();
            for _ in 0..1000 {
                let p = Point3::new(
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                );
                let v = kind.eval(&p);
                for axis in 0..3 {
                    let mut q = p;
                    q[axis] += TAU / kind.periods()[axis];
                    assert_abs_diff_eq!(kind.eval(&q), v, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn p_is_odd_under_half_period_shift() {
        let kind = TpmsKind::new(TpmsSurface::P);
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let p = Point3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let q = p + crate::Vector3::new(PI, PI, PI);
            assert_abs_diff_eq!(kind.eval(&q), -kind.eval(&p), epsilon = 1e-9);
        }
    }

    #[test]
    fn fields_are_bounded() {
        let bounds = [
            (TpmsSurface::P, 3.0),
            (TpmsSurface::D, 2.0),
            (TpmsSurface::G, 1.5),
            (TpmsSurface::Iwp, 9.0),
        ];
        for (surface, bound) in bounds {
            let kind = TpmsKind::new(surface);
            let mut g = kind.unit_cell_grid(48).unwrap();
            sample_tpms(kind, &mut g, 0);
            let (lo, hi) = g.min_max();
            assert!(
                f64::from(lo) >= -bound - 1e-6 && f64::from(hi) <= bound + 1e-6,
                "{surface}"
            );
        }
    }

    #[test]
    fn p_unit_cell_is_half_solid() {
        let kind = TpmsKind::new(TpmsSurface::P);
        let mut g = kind.unit_cell_grid(64).unwrap();
        sample_tpms(kind, &mut g, 0);
        assert!((solid_fraction(&g, 0.0) - 0.5).abs() <= 0.02);
        let (lo, hi) = g.min_max();
        assert!(lo < 0.0 && hi > 0.0);
        assert!(!marching_cubes(&g, 0.0).triangles.is_empty());
    }

    #[test]
    fn gyroid_range() {
        let kind = TpmsKind::new(TpmsSurface::G);
        let mut g = kind.unit_cell_grid(64).unwrap();
        sample_tpms(kind, &mut g, 0);
        let (lo, hi) = g.min_max();
        assert!(f64::from(lo) >= -1.5 - 1e-6 && f64::from(hi) <= 1.5 + 1e-6);
    }

    #[test]
    fn parse_names() {
        for s in TpmsSurface::ALL {
            assert_eq!(s.name().parse::<TpmsSurface>().unwrap(), s);
        }
        assert!(TpmsKind::with_periods(TpmsSurface::P, [1.0, 0.0, 1.0]).is_err());
    }
}
