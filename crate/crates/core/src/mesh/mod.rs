//! Volumetric meshes and the interpolation centers derived from them.
//!
//! Mesh vertices become `+1` nodes; edge, face (tile) and cell centers become
//! `-1` nodes. For the anisotropic scheme each cell center is additionally
//! joined to the centers of its faces (for triangles: its edges) by a
//! [`CenterSegment`].

mod io;

use std::collections::HashMap;

pub use io::{load_mesh, save_mesh, MeshFormat};

use crate::error::{Error, Result};
use crate::rbf::{InterpolationCenter, Mode};
use crate::Point3;

pub const VERTEX_VALUE: f64 = 1.0;
pub const CENTER_VALUE: f64 = -1.0;

/// Relative tolerance (times the bounding-box diagonal) used to merge centers.
pub const DEDUP_TOL: f64 = 1e-9;
/// Relative tolerance (times diagonal^dim) under which a cell is degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshKind {
    Tri2D,
    Tet,
    Hex,
}

const TRI_EDGES: &[[usize; 2]] = &[[0, 1], [1, 2], [2, 0]];
const TET_EDGES: &[[usize; 2]] = &[[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
const HEX_EDGES: &[[usize; 2]] = &[
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];
const TET_FACES: &[&[usize]] = &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]];
// VTK hexahedron: bottom quad 0-3, top quad 4-7
const HEX_FACES: &[&[usize]] = &[
    &[0, 1, 2, 3],
    &[4, 5, 6, 7],
    &[0, 1, 5, 4],
    &[1, 2, 6, 5],
    &[2, 3, 7, 6],
    &[3, 0, 4, 7],
];
// split of the hexahedron into six tetrahedra around the 0-6 diagonal
const HEX_TETS: &[[usize; 4]] = &[
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 7, 4, 6],
    [0, 4, 5, 6],
    [0, 5, 1, 6],
];

impl MeshKind {
    pub fn arity(self) -> usize {
        match self {
            MeshKind::Tri2D => 3,
            MeshKind::Tet => 4,
            MeshKind::Hex => 8,
        }
    }

    pub fn dim(self) -> i32 {
        match self {
            MeshKind::Tri2D => 2,
            MeshKind::Tet | MeshKind::Hex => 3,
        }
    }

    /// Local vertex pairs forming the edges of one cell.
    pub fn local_edges(self) -> &'static [[usize; 2]] {
        match self {
            MeshKind::Tri2D => TRI_EDGES,
            MeshKind::Tet => TET_EDGES,
            MeshKind::Hex => HEX_EDGES,
        }
    }

    /// Local faces of one 3D cell; empty for triangles.
    pub fn local_faces(self) -> &'static [&'static [usize]] {
        match self {
            MeshKind::Tri2D => &[],
            MeshKind::Tet => TET_FACES,
            MeshKind::Hex => HEX_FACES,
        }
    }
}

/// Vertices plus single-kind cell connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumetricMesh {
    kind: MeshKind,
    vertices: Vec<Point3>,
    connectivity: Vec<usize>,
}

impl VolumetricMesh {
    /// Builds and validates a mesh. `connectivity` holds `arity` vertex
    /// indices per cell, back to back.
    pub fn new(kind: MeshKind, vertices: Vec<Point3>, connectivity: Vec<usize>) -> Result<Self> {
        let mesh = Self {
            kind,
            vertices,
            connectivity,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn connectivity(&self) -> &[usize] {
        &self.connectivity
    }

    pub fn num_cells(&self) -> usize {
        self.connectivity.len() / self.kind.arity()
    }

    pub fn cell(&self, i: usize) -> &[usize] {
        let n = self.kind.arity();
        &self.connectivity[i * n..(i + 1) * n]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.connectivity.chunks_exact(self.kind.arity())
    }

    pub fn bounding_box(&self) -> (Point3, Point3) {
        bounding_box(&self.vertices)
    }

    pub fn diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Signed area (triangles) or volume (tets, hexes) of cell `i`.
    pub fn signed_cell_measure(&self, i: usize) -> f64 {
        let c = self.cell(i);
        let v = |k: usize| self.vertices[c[k]];
        match self.kind {
            MeshKind::Tri2D => {
                let (a, b, c) = (v(0), v(1), v(2));
                0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
            }
            MeshKind::Tet => tet_volume(&v(0), &v(1), &v(2), &v(3)),
            MeshKind::Hex => HEX_TETS
                .iter()
                .map(|t| tet_volume(&v(t[0]), &v(t[1]), &v(t[2]), &v(t[3])))
                .sum(),
        }
    }

    pub fn cell_measure(&self, i: usize) -> f64 {
        self.signed_cell_measure(i).abs()
    }

    /// Measure below which a cell counts as degenerate.
    pub fn degenerate_threshold(&self) -> f64 {
        DEGENERATE_TOL * self.diagonal().powi(self.kind.dim())
    }

    pub(crate) fn with_vertices(&self, vertices: Vec<Point3>) -> Self {
        Self {
            kind: self.kind,
            vertices,
            connectivity: self.connectivity.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let arity = self.kind.arity();
        if self.vertices.is_empty() {
            return Err(Error::Validation("mesh has no vertices".into()));
        }
        if self.connectivity.is_empty() {
            return Err(Error::Validation("mesh has no cells".into()));
        }
        if !self.connectivity.len().is_multiple_of(arity) {
            return Err(Error::Validation(format!(
                "connectivity length {} is not a multiple of the cell arity {arity}",
                self.connectivity.len()
            )));
        }
        if let Some((i, v)) = self
            .vertices
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(Error::Validation(format!(
                "vertex {i} is not finite: {v:?}"
            )));
        }
        if self.kind == MeshKind::Tri2D {
            if let Some(i) = self.vertices.iter().position(|v| v.z != 0.0) {
                return Err(Error::Validation(format!(
                    "triangle meshes must be planar (z = 0); vertex {i} has z = {}",
                    self.vertices[i].z
                )));
            }
        }
        let nv = self.vertices.len();
        for (ci, cell) in self.cells().enumerate() {
            if let Some(&bad) = cell.iter().find(|&&k| k >= nv) {
                return Err(Error::Validation(format!(
                    "cell {ci} references vertex {bad}, but the mesh has {nv} vertices"
                )));
            }
        }
        let threshold = self.degenerate_threshold();
        for ci in 0..self.num_cells() {
            let m = self.cell_measure(ci);
            if !(m > threshold) {
                return Err(Error::Validation(format!(
                    "cell {ci} is degenerate (measure {m:.3e} <= {threshold:.3e})"
                )));
            }
        }
        Ok(())
    }
}

fn tet_volume(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    (b - a).cross(&(c - a)).dot(&(d - a)) / 6.0
}

pub(crate) fn bounding_box<'a>(points: impl IntoIterator<Item = &'a Point3>) -> (Point3, Point3) {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// A position carrying a prescribed field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalValue {
    pub position: Point3,
    pub value: f64,
}

/// Segment from a face (tile) center to the center of the cell owning it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSegment {
    pub a: Point3,
    pub b: Point3,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshCenters {
    pub vertices: Vec<NodalValue>,
    pub edges: Vec<NodalValue>,
    /// Triangle centers for 2D meshes, face centers for 3D meshes.
    pub tiles: Vec<NodalValue>,
    /// Cell centers; empty for 2D meshes.
    pub cells: Vec<NodalValue>,
}

impl MeshCenters {
    pub fn len(&self) -> usize {
        self.vertices.len() + self.edges.len() + self.tiles.len() + self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &NodalValue> {
        self.vertices
            .iter()
            .chain(&self.edges)
            .chain(&self.tiles)
            .chain(&self.cells)
    }
}

/// Mean of the given mesh vertices, summed in ascending index order so that
/// the same sub-entity seen from two cells produces bit-identical centers.
fn centroid(mesh: &VolumetricMesh, cell: &[usize], local: &[usize]) -> Point3 {
    let mut ids: Vec<usize> = local.iter().map(|&k| cell[k]).collect();
    ids.sort_unstable();
    let sum = ids
        .iter()
        .fold(Point3::origin(), |acc, &i| acc + mesh.vertices[i].coords);
    sum / ids.len() as f64
}

struct Dedup {
    quantum: f64,
    seen: HashMap<[i64; 3], ()>,
    out: Vec<NodalValue>,
}

impl Dedup {
    fn new(quantum: f64) -> Self {
        Self {
            quantum,
            seen: HashMap::new(),
            out: Vec::new(),
        }
    }

    fn push(&mut self, position: Point3, value: f64) {
        let key = [
            (position.x / self.quantum).round() as i64,
            (position.y / self.quantum).round() as i64,
            (position.z / self.quantum).round() as i64,
        ];
        if self.seen.insert(key, ()).is_none() {
            self.out.push(NodalValue { position, value });
        }
    }
}

/// Vertex nodes (+1) and deduplicated edge, tile/face and cell centers (-1).
pub fn compute_centers(mesh: &VolumetricMesh) -> MeshCenters {
    let quantum = DEDUP_TOL * mesh.diagonal();
    let kind = mesh.kind();

    let vertices = mesh
        .vertices()
        .iter()
        .map(|&position| NodalValue {
            position,
            value: VERTEX_VALUE,
        })
        .collect();

    let mut edges = Dedup::new(quantum);
    let mut tiles = Dedup::new(quantum);
    let mut cells = Dedup::new(quantum);
    let all: Vec<usize> = (0..kind.arity()).collect();
    for cell in mesh.cells() {
        for e in kind.local_edges() {
            edges.push(centroid(mesh, cell, e), CENTER_VALUE);
        }
        match kind {
            MeshKind::Tri2D => tiles.push(centroid(mesh, cell, &all), CENTER_VALUE),
            MeshKind::Tet | MeshKind::Hex => {
                for f in kind.local_faces() {
                    tiles.push(centroid(mesh, cell, f), CENTER_VALUE);
                }
                cells.push(centroid(mesh, cell, &all), CENTER_VALUE);
            }
        }
    }

    MeshCenters {
        vertices,
        edges: edges.out,
        tiles: tiles.out,
        cells: cells.out,
    }
}

/// One segment per (edge center, triangle) in 2D and per (face center, cell)
/// in 3D. Segments are per cell: a shared face yields one segment into each
/// neighbouring cell.
pub fn build_segments(mesh: &VolumetricMesh) -> Vec<CenterSegment> {
    let kind = mesh.kind();
    let all: Vec<usize> = (0..kind.arity()).collect();
    let mut out = Vec::new();
    for cell in mesh.cells() {
        let center = centroid(mesh, cell, &all);
        let mut push = |a: Point3| {
            out.push(CenterSegment {
                a,
                b: center,
                value: CENTER_VALUE,
            })
        };
        match kind {
            MeshKind::Tri2D => kind
                .local_edges()
                .iter()
                .for_each(|e| push(centroid(mesh, cell, e))),
            MeshKind::Tet | MeshKind::Hex => kind
                .local_faces()
                .iter()
                .for_each(|f| push(centroid(mesh, cell, f))),
        }
    }
    out
}

/// Interpolation centers for the chosen scheme.
///
/// Isotropic: every nodal value becomes a point center. Anisotropic: vertices
/// and edge centers stay point centers; tile/face and cell centers only enter
/// through the segments, never as points as well.
pub fn assemble_center_set(mesh: &VolumetricMesh, mode: Mode) -> Vec<InterpolationCenter> {
    let centers = compute_centers(mesh);
    match mode {
        Mode::Isotropic => centers
            .iter()
            .copied()
            .map(InterpolationCenter::Point)
            .collect(),
        Mode::Anisotropic => centers
            .vertices
            .iter()
            .chain(&centers.edges)
            .copied()
            .map(InterpolationCenter::Point)
            .chain(
                build_segments(mesh)
                    .into_iter()
                    .map(InterpolationCenter::Segment),
            )
            .collect(),
    }
}
