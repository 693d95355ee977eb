//! Iso-surface (marching cubes) and iso-contour (marching squares) extraction.
//!
//! Surfaces are oriented so that triangle normals point from the solid side
//! (values at or above the iso-value) toward the void side.

mod export;
mod squares;
mod tables;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

pub use export::{export_contours_obj, export_obj, export_pgm, read_obj};
pub use squares::{marching_squares, ContourSet};

use crate::grid::VoxelGrid;
use crate::Point3;
use tables::TRI_TABLE;

/// Triangles below this area are dropped.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;
/// Weld tolerance relative to the grid diagonal.
pub const WELD_TOL: f64 = 1e-9;

const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [3, 2],
    [0, 3],
    [4, 5],
    [5, 6],
    [7, 6],
    [4, 7],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleSoup {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleSoup {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    /// Signed enclosed volume (divergence theorem); meaningful for closed surfaces.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// `V - E + F` over the vertices referenced by triangles.
    pub fn euler_characteristic(&self) -> i64 {
        let mut verts = HashSet::new();
        let mut edges = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                verts.insert(a);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        verts.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Merges vertices whose positions agree after quantization by `tol`,
    /// then drops triangles that collapsed or fell below [`MIN_TRIANGLE_AREA`].
    pub fn welded(&self, tol: f64) -> TriangleSoup {
        let mut map: HashMap<[i64; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let remap: Vec<usize> = self
            .vertices
            .iter()
            .map(|p| {
                let key = [p.x, p.y, p.z].map(|c| (c / tol).round() as i64);
                *map.entry(key).or_insert_with(|| {
                    vertices.push(*p);
                    vertices.len() - 1
                })
            })
            .collect();
        let mut out = TriangleSoup {
            vertices,
            triangles: Vec::with_capacity(self.triangles.len()),
        };
        for t in &self.triangles {
            let w = t.map(|i| remap[i]);
            if w[0] != w[1]
                && w[1] != w[2]
                && w[0] != w[2]
                && out.triangle_area(&w) > MIN_TRIANGLE_AREA
            {
                out.triangles.push(w);
            }
        }
        out
    }
}

/// Marching cubes followed by vertex welding (tolerance `WELD_TOL` times the
/// grid diagonal).
pub fn marching_cubes(grid: &VoxelGrid, iso: f64) -> TriangleSoup {
    let raw = marching_cubes_unwelded(grid, iso);
    raw.welded(WELD_TOL * grid.diagonal())
}

/// Marching cubes without welding: three fresh vertices per triangle.
///
/// Every vertex lies on a lattice edge at the linear-interpolation crossing
/// `t = (iso - v0) / (v1 - v0)`, with `v0` at the lower lattice end.
pub fn marching_cubes_unwelded(grid: &VoxelGrid, iso: f64) -> TriangleSoup {
    let [nx, ny, nz] = grid.dims;
    if nx < 2 || ny < 2 || nz < 2 {
        return TriangleSoup::default();
    }
    let slabs: Vec<TriangleSoup> = (0..nz - 1)
        .into_par_iter()
        .map(|k| {
            let mut soup = TriangleSoup::default();
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    march_cell(grid, iso, [i, j, k], &mut soup);
                }
            }
            soup
        })
        .collect();

    let mut out = TriangleSoup::default();
    for slab in slabs {
        let offset = out.vertices.len();
        out.vertices.extend(slab.vertices);
        out.triangles
            .extend(slab.triangles.into_iter().map(|t| t.map(|i| i + offset)));
    }
    out
}

fn march_cell(grid: &VoxelGrid, iso: f64, base: [usize; 3], soup: &mut TriangleSoup) {
    let mut values = [0.0f64; 8];
    let mut case = 0usize;
    for (c, off) in CORNERS.iter().enumerate() {
        let v = f64::from(grid.get(base[0] + off[0], base[1] + off[1], base[2] + off[2]));
        values[c] = v;
        if v < iso {
            case |= 1 << c;
        }
    }
    if case == 0 || case == 255 {
        return;
    }
    let mut edge_points: [Option<Point3>; 12] = [None; 12];
    let row = &TRI_TABLE[case];
    for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
        let mut ids = [0usize; 3];
        for (slot, &e) in ids.iter_mut().zip(tri) {
            let e = e as usize;
            let p = *edge_points[e].get_or_insert_with(|| {
                let [a, b] = EDGES[e];
                let pa = corner_position(grid, base, a);
                let pb = corner_position(grid, base, b);
                crossing(&pa, &pb, values[a], values[b], iso)
            });
            soup.vertices.push(p);
            *slot = soup.vertices.len() - 1;
        }
        let t = ids;
        if soup.triangle_area(&t) > MIN_TRIANGLE_AREA {
            soup.triangles.push(t);
        } else {
            soup.vertices.truncate(soup.vertices.len() - 3);
        }
    }
}

fn corner_position(grid: &VoxelGrid, base: [usize; 3], corner: usize) -> Point3 {
    let off = CORNERS[corner];
    grid.position(base[0] + off[0], base[1] + off[1], base[2] + off[2])
}

/// Crossing point on the lattice edge `pa -> pb` (with `pa` the lower end).
#[inline]
pub(crate) fn crossing(pa: &Point3, pb: &Point3, va: f64, vb: f64, iso: f64) -> Point3 {
    let t = (iso - va) / (vb - va);
    if t <= 0.0 {
        *pa
    } else if t >= 1.0 {
        *pb
    } else {
        pa + (pb - pa) * t
    }
}
