//! Small reference meshes: single cells, the 20-tetrahedron icosahedron, and
//! structured hexahedral blocks and rods.

use crate::mesh::{MeshKind, VolumetricMesh};
use crate::Point3;

fn build(kind: MeshKind, vertices: Vec<Point3>, connectivity: Vec<usize>) -> VolumetricMesh {
    VolumetricMesh::new(kind, vertices, connectivity).expect("reference mesh is valid")
}

/// Triangle (0,0), (1,0), (0,1).
pub fn single_triangle() -> VolumetricMesh {
    build(
        MeshKind::Tri2D,
        vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 1., 0.),
        ],
        vec![0, 1, 2],
    )
}

/// Unit square split into `2 n^2` triangles, scaled by `edge`.
pub fn triangle_grid(n: usize, edge: f64) -> VolumetricMesh {
    let h = edge / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point3::new(i as f64 * h, j as f64 * h, 0.));
        }
    }
    let mut conn = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            conn.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    build(MeshKind::Tri2D, vertices, conn)
}

/// The canonical simplex (0,0,0), (1,0,0), (0,1,0), (0,0,1).
pub fn unit_tet() -> VolumetricMesh {
    build(
        MeshKind::Tet,
        vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 1., 0.),
            Point3::new(0., 0., 1.),
        ],
        vec![0, 1, 2, 3],
    )
}

/// The unit simplex plus its mirror image through the face (1,2,3).
pub fn two_tets() -> VolumetricMesh {
    build(
        MeshKind::Tet,
        vec![
            Point3::new(0., 0., 0.),
            Point3::new(1., 0., 0.),
            Point3::new(0., 1., 0.),
            Point3::new(0., 0., 1.),
            Point3::new(2. / 3., 2. / 3., 2. / 3.),
        ],
        vec![0, 1, 2, 3, 4, 1, 3, 2],
    )
}

/// Unit cube as one hexahedron.
pub fn unit_hex() -> VolumetricMesh {
    hex_block(1, 1, 1, 1.0)
}

/// `nx x ny x nz` block of cubic hexahedra with edge length `edge`.
pub fn hex_block(nx: usize, ny: usize, nz: usize, edge: f64) -> VolumetricMesh {
    let idx = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut vertices = Vec::new();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Point3::new(
                    i as f64 * edge,
                    j as f64 * edge,
                    k as f64 * edge,
                ));
            }
        }
    }
    let mut conn = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                conn.extend_from_slice(&[
                    idx(i, j, k),
                    idx(i + 1, j, k),
                    idx(i + 1, j + 1, k),
                    idx(i, j + 1, k),
                    idx(i, j, k + 1),
                    idx(i + 1, j, k + 1),
                    idx(i + 1, j + 1, k + 1),
                    idx(i, j + 1, k + 1),
                ]);
            }
        }
    }
    build(MeshKind::Hex, vertices, conn)
}

/// `n` cubes in a row along x.
pub fn hex_rod(n: usize, edge: f64) -> VolumetricMesh {
    hex_block(n, 1, 1, edge)
}

/// Icosahedron of unit circumradius split into 20 tetrahedra that share the
/// center vertex (index 12).
pub fn icosahedron() -> VolumetricMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = Vec::with_capacity(13);
    for s1 in [-1.0, 1.0] {
        for s2 in [-1.0, 1.0] {
            vertices.push(Point3::new(0.0, s1, s2 * phi));
            vertices.push(Point3::new(s1, s2 * phi, 0.0));
            vertices.push(Point3::new(s2 * phi, 0.0, s1));
        }
    }
    let radius = (1.0 + phi * phi).sqrt();
    for v in &mut vertices {
        *v /= radius;
    }
    let edge = 2.0 / radius;
    let adjacent = |a: &Point3, b: &Point3| ((a - b).norm() - edge).abs() < 1e-9;

    let center = vertices.len();
    vertices.push(Point3::origin());
    let mut conn = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                let (pa, pb, pc) = (&vertices[a], &vertices[b], &vertices[c]);
                if adjacent(pa, pb) && adjacent(pb, pc) && adjacent(pa, pc) {
                    // positively oriented (center, a, b, c)
                    let orient = pa.coords.cross(&pb.coords).dot(&pc.coords);
                    if orient > 0.0 {
                        conn.extend_from_slice(&[center, a, b, c]);
                    } else {
                        conn.extend_from_slice(&[center, a, c, b]);
                    }
                }
            }
        }
    }
    build(MeshKind::Tet, vertices, conn)
}

/// Copy of `mesh` with all coordinates multiplied by `factor`.
pub fn scaled(mesh: &VolumetricMesh, factor: f64) -> VolumetricMesh {
    let vertices = mesh.vertices().iter().map(|p| p * factor).collect();
    build(mesh.kind(), vertices, mesh.connectivity().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn icosahedron_has_twenty_positive_tets() {
        let m = icosahedron();
        assert_eq!(m.num_cells(), 20);
        assert_eq!(m.vertices().len(), 13);
        assert!((0..20).all(|i| m.signed_cell_measure(i) > 0.0));
        // volume of the unit-circumradius icosahedron
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let a = 2.0 / (1.0 + phi * phi).sqrt();
        let expected = 5.0 * (3.0 + 5f64.sqrt()) / 12.0 * a.powi(3);
        let total: f64 = (0..20).map(|i| m.cell_measure(i)).sum();
        assert_abs_diff_eq!(total, expected, epsilon = 1e-12);
    }

    #[test]
    fn block_volume() {
        let m = hex_block(2, 2, 2, 0.5);
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.vertices().len(), 27);
        let total: f64 = (0..8).map(|i| m.signed_cell_measure(i)).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn triangle_grid_area() {
        let m = triangle_grid(3, 2.0);
        assert_eq!(m.num_cells(), 18);
        let total: f64 = (0..m.num_cells()).map(|i| m.cell_measure(i)).sum();
        assert_abs_diff_eq!(total, 4.0, epsilon = 1e-12);
    }
}
