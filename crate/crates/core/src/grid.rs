//! Regular voxel lattices and scalar-field sampling.
//!
//! Values are stored x-fastest, then y, then z, as 32-bit floats; the same
//! layout is used by the `.raw` file written next to a `.vhdr` header.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rbf::InterpolationModel;
use crate::tpms::TpmsKind;
use crate::Point3;

pub const DEFAULT_RESOLUTION: usize = 64;
pub const DEFAULT_PAD: f64 = 0.05;

/// Anything that can be evaluated at a point.
pub trait ScalarField: Sync {
    fn value_at(&self, p: &Point3) -> f64;
}

impl ScalarField for InterpolationModel {
    fn value_at(&self, p: &Point3) -> f64 {
        self.evaluate(p)
    }
}

impl<F: Fn(&Point3) -> f64 + Sync> ScalarField for F {
    fn value_at(&self, p: &Point3) -> f64 {
        self(p)
    }
}

/// The two field kinds the pipeline samples.
#[derive(Debug, Clone, Copy)]
pub enum FieldSource<'a> {
    Model(&'a InterpolationModel),
    Tpms(TpmsKind),
}

impl ScalarField for FieldSource<'_> {
    fn value_at(&self, p: &Point3) -> f64 {
        match self {
            FieldSource::Model(m) => m.evaluate(p),
            FieldSource::Tpms(k) => k.eval(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub origin: Point3,
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
    pub values: Vec<f32>,
}

impl VoxelGrid {
    /// A zero-filled grid.
    pub fn new(origin: Point3, spacing: [f64; 3], dims: [usize; 3]) -> Result<Self> {
        let grid = Self {
            origin,
            spacing,
            dims,
            values: vec![0.0; dims.iter().product()],
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `n^3` samples covering the cube `[origin, origin + extent]` inclusive.
    pub fn cube(origin: Point3, extent: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "resolution must be >= 2, got {n}"
            )));
        }
        let h = extent / (n - 1) as f64;
        Self::new(origin, [h; 3], [n; 3])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let [nx, ny, _] = self.dims;
        (idx % nx, (idx / nx) % ny, idx / (nx * ny))
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> Point3 {
        Point3::new(
            self.origin.x + i as f64 * self.spacing[0],
            self.origin.y + j as f64 * self.spacing[1],
            self.origin.z + k as f64 * self.spacing[2],
        )
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.index(i, j, k)]
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.values
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Diagonal of the sampled box.
    pub fn diagonal(&self) -> f64 {
        (0..3)
            .map(|a| ((self.dims[a] - 1) as f64 * self.spacing[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "grid dimensions must be positive, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {:?}",
                self.spacing
            )));
        }
        if self.values.len() != self.dims.iter().product::<usize>() {
            return Err(Error::InvalidParameter(
                "value count does not match dimensions".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid holds non-finite values".into(),
            ));
        }
        Ok(())
    }
}

fn padded_extent(lo: &Point3, hi: &Point3, pad: f64, axes: usize) -> Result<(Point3, [f64; 3])> {
    if !(pad >= 0.0 && pad.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pad must be non-negative, got {pad}"
        )));
    }
    for a in 0..axes {
        if !(hi[a] > lo[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
            return Err(Error::InvalidBBox(format!(
                "max must exceed min on every axis, got min {:?} max {:?}",
                lo.coords.as_slice(),
                hi.coords.as_slice()
            )));
        }
    }
    let diag = (0..axes)
        .map(|a| (hi[a] - lo[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    let margin = pad * diag;
    let mut origin = *lo;
    let mut extent = [0.0; 3];
    for a in 0..axes {
        origin[a] -= margin;
        extent[a] = hi[a] - lo[a] + 2.0 * margin;
    }
    Ok((origin, extent))
}

fn axis_counts(extent: &[f64], resolution: usize) -> Vec<usize> {
    let longest = extent.iter().copied().fold(0.0, f64::max);
    extent
        .iter()
        .map(|&e| {
            if e == longest {
                resolution
            } else {
                ((e / longest * resolution as f64).round() as usize).max(2)
            }
        })
        .collect()
}

/// Sampling lattice over `[lo, hi]` grown by `pad` times the diagonal on every
/// side. The longest axis gets `resolution` samples (end points included),
/// the others proportionally fewer but at least 2.
pub fn make_grid(lo: &Point3, hi: &Point3, resolution: usize, pad: f64) -> Result<VoxelGrid> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    let (origin, extent) = padded_extent(lo, hi, pad, 3)?;
    let n = axis_counts(&extent, resolution);
    let dims = [n[0], n[1], n[2]];
    let spacing = [0, 1, 2].map(|a| extent[a] / (dims[a] - 1) as f64);
    VoxelGrid::new(origin, spacing, dims)
}

/// Single-slice (`nz = 1`) lattice in the z = 0 plane for planar meshes.
pub fn make_grid_2d(lo: &Point3, hi: &Point3, resolution: usize, pad: f64) -> Result<VoxelGrid> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    let (mut origin, extent) = padded_extent(lo, hi, pad, 2)?;
    origin.z = 0.0;
    let n = axis_counts(&extent[..2], resolution);
    let dims = [n[0], n[1], 1];
    let spacing = [
        extent[0] / (dims[0] - 1) as f64,
        extent[1] / (dims[1] - 1) as f64,
        1.0,
    ];
    VoxelGrid::new(origin, spacing, dims)
}

/// Evaluates `field` at every voxel. `workers == 0` uses the global thread
/// pool; otherwise a pool of exactly `workers` threads. Every voxel is computed
/// independently so the result does not depend on the worker count.
pub fn sample_field<F: ScalarField + ?Sized>(field: &F, grid: &mut VoxelGrid, workers: usize) {
    let [nx, ny, _] = grid.dims;
    let slab = nx * ny;
    let origin = grid.origin;
    let spacing = grid.spacing;
    let fill = |values: &mut [f32]| {
        values
            .par_chunks_mut(slab)
            .enumerate()
            .for_each(|(k, chunk)| {
                for j in 0..ny {
                    for i in 0..nx {
                        let p = Point3::new(
                            origin.x + i as f64 * spacing[0],
                            origin.y + j as f64 * spacing[1],
                            origin.z + k as f64 * spacing[2],
                        );
                        chunk[i + nx * j] = field.value_at(&p) as f32;
                    }
                }
            })
    };
    if workers == 0 {
        fill(&mut grid.values);
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| fill(&mut grid.values)),
            Err(_) => fill(&mut grid.values),
        }
    }
}

/// Fraction of voxels at or above `iso` (the solid side).
pub fn solid_fraction(grid: &VoxelGrid, iso: f64) -> f64 {
    if grid.values.is_empty() {
        return 0.0;
    }
    let solid = grid.values.iter().filter(|&&v| f64::from(v) >= iso).count();
    solid as f64 / grid.values.len() as f64
}

fn volume_paths(stem: &Path) -> Result<(PathBuf, PathBuf)> {
    if stem.as_os_str().is_empty() {
        return Err(Error::io(
            stem,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty volume path"),
        ));
    }
    let stem = match stem.extension().and_then(|e| e.to_str()) {
        Some("vhdr") | Some("raw") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let with = |ext: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    Ok((with(".vhdr"), with(".raw")))
}

/// Writes `<stem>.vhdr` and `<stem>.raw`.
pub fn write_volume(grid: &VoxelGrid, stem: impl AsRef<Path>) -> Result<()> {
    let (hdr, raw) = volume_paths(stem.as_ref())?;
    let [nx, ny, nz] = grid.dims;
    let mut text = String::new();
    let _ = writeln!(text, "DIMS {nx} {ny} {nz}");
    let _ = writeln!(
        text,
        "ORIGIN {:.16e} {:.16e} {:.16e}",
        grid.origin.x, grid.origin.y, grid.origin.z
    );
    let _ = writeln!(
        text,
        "SPACING {:.16e} {:.16e} {:.16e}",
        grid.spacing[0], grid.spacing[1], grid.spacing[2]
    );
    text.push_str("DTYPE float32le\n");
    fs::write(&hdr, text).map_err(|e| Error::io(&hdr, e))?;
    let bytes: Vec<u8> = grid.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))
}

pub fn read_volume(stem: impl AsRef<Path>) -> Result<VoxelGrid> {
    let (hdr, raw) = volume_paths(stem.as_ref())?;
    let text = fs::read_to_string(&hdr).map_err(|e| Error::io(&hdr, e))?;
    let mut dims = None;
    let mut origin = None;
    let mut spacing = None;
    let mut dtype_ok = false;
    for (i, line) in text.lines().enumerate() {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.is_empty() {
            continue;
        }
        let ln = i + 1;
        let reals = |n: usize| -> Result<Vec<f64>> {
            if t.len() != n + 1 {
                return Err(Error::parse(
                    &hdr,
                    ln,
                    format!("'{}' needs {n} values", t[0]),
                ));
            }
            t[1..]
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(&hdr, ln, format!("cannot parse '{s}'")))
                })
                .collect()
        };
        match t[0] {
            "DIMS" => {
                if t.len() != 4 {
                    return Err(Error::parse(&hdr, ln, "'DIMS' needs 3 values"));
                }
                let mut d = [0usize; 3];
                for a in 0..3 {
                    d[a] = t[a + 1].parse().map_err(|_| {
                        Error::parse(&hdr, ln, format!("cannot parse '{}'", t[a + 1]))
                    })?;
                }
                dims = Some(d);
            }
            "ORIGIN" => {
                let v = reals(3)?;
                origin = Some(Point3::new(v[0], v[1], v[2]));
            }
            "SPACING" => {
                let v = reals(3)?;
                spacing = Some([v[0], v[1], v[2]]);
            }
            "DTYPE" => {
                if t.get(1) != Some(&"float32le") {
                    return Err(Error::parse(&hdr, ln, "only DTYPE float32le is supported"));
                }
                dtype_ok = true;
            }
            other => {
                return Err(Error::parse(
                    &hdr,
                    ln,
                    format!("unknown header key '{other}'"),
                ))
            }
        }
    }
    let eof = text.lines().count() + 1;
    let missing = |key: &str| Error::parse(&hdr, eof, format!("missing {key} line"));
    let dims = dims.ok_or_else(|| missing("DIMS"))?;
    let origin = origin.ok_or_else(|| missing("ORIGIN"))?;
    let spacing = spacing.ok_or_else(|| missing("SPACING"))?;
    if !dtype_ok {
        return Err(missing("DTYPE"));
    }

    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    let expected = dims.iter().product::<usize>() as u64 * 4;
    if bytes.len() as u64 != expected {
        return Err(Error::HeaderMismatch {
            path: raw.display().to_string(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let values = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let grid = VoxelGrid {
        origin,
        spacing,
        dims,
        values,
    };
    grid.validate()
        .map_err(|e| Error::parse(&hdr, eof, e.to_string()))?;
    Ok(grid)
}
