//! Porous scaffold construction from volumetric meshes.
//!
//! A mesh (triangles, tetrahedra or hexahedra) is turned into a set of
//! interpolation centers: vertices carry `+1`, derived edge/face/cell centers
//! carry `-1`. A radial basis function model is fitted to those values, either
//! with plain Euclidean distances or with the anisotropic point-to-segment
//! metric in which every cell center is joined to its face (or edge) centers
//! by a segment. The fitted field is sampled on a voxel grid and the scaffold
//! boundary is extracted as an iso-surface.
//!
//! The TPMS fields and the seeded mesh perturbation exist as baselines for
//! comparison with the interpolated scaffolds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distance;
pub mod error;
pub mod grid;
pub mod isosurface;
pub mod mesh;
pub mod perturb;
pub mod pipeline;
pub mod rbf;
pub mod shapes;
pub mod tpms;

pub use error::{Error, Result};

/// Positions in model units.
pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
