//! OBJ and PGM writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ContourSet, TriangleSoup};
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::Point3;

fn write_vertex(out: &mut String, p: &Point3) {
    let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
}

/// ASCII OBJ: all `v` lines, then `f` lines with 1-based indices.
pub fn export_obj(soup: &TriangleSoup, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(soup.vertices.len() * 48 + soup.triangles.len() * 24);
    for p in &soup.vertices {
        write_vertex(&mut out, p);
    }
    for t in &soup.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Contours as OBJ polylines (`l` elements).
pub fn export_contours_obj(contours: &ContourSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in contours.polylines.iter().flatten() {
        write_vertex(&mut out, p);
    }
    let mut next = 1;
    for line in &contours.polylines {
        out.push('l');
        for k in next..next + line.len() {
            let _ = write!(out, " {k}");
        }
        out.push('\n');
        next += line.len();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads the `v` and triangular `f` records of an OBJ file. Face entries of
/// the form `i/t/n` use only the position index; negative indices count
/// from the end as usual.
pub fn read_obj(path: impl AsRef<Path>) -> Result<TriangleSoup> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut soup = TriangleSoup::default();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let mut t = line.split_whitespace();
        match t.next() {
            Some("v") => {
                let c: Vec<f64> = t
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(path, ln, "bad vertex coordinate"))?;
                if c.len() != 3 {
                    return Err(Error::parse(path, ln, "vertex needs 3 coordinates"));
                }
                soup.vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let n = soup.vertices.len() as i64;
                let idx = t
                    .map(|s| {
                        let k: i64 = s
                            .split('/')
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| {
                                Error::parse(path, ln, format!("bad face index '{s}'"))
                            })?;
                        let k = if k < 0 { n + k } else { k - 1 };
                        if k < 0 || k >= n {
                            return Err(Error::parse(
                                path,
                                ln,
                                format!("face index {s} out of range"),
                            ));
                        }
                        Ok(k as usize)
                    })
                    .collect::<Result<Vec<usize>>>()?;
                if idx.len() != 3 {
                    return Err(Error::parse(
                        path,
                        ln,
                        "only triangular faces are supported",
                    ));
                }
                soup.triangles.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok(soup)
}

/// Binary (P5) PGM of a single-slice grid. Values are clamped to `[lo, hi]`
/// and mapped affinely to 0..=255 with halves rounded up. The top image row
/// is the largest `j`.
pub fn export_pgm(grid: &VoxelGrid, path: impl AsRef<Path>, lo: f64, hi: f64) -> Result<()> {
    let path = path.as_ref();
    let [nx, ny, nz] = grid.dims;
    if nz != 1 {
        return Err(Error::InvalidParameter(format!(
            "PGM export needs a single-slice grid, got nz = {nz}"
        )));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "PGM range needs finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.reserve(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            out.push(gray(f64::from(grid.get(i, j, 0)), lo, hi));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn gray(v: f64, lo: f64, hi: f64) -> u8 {
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    if t.is_nan() {
        return 0;
    }
    (t * 255.0 + 0.5).floor() as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample_field};
    use crate::isosurface::marching_cubes;
    use crate::isosurface::marching_squares;

    fn flat(values: &[f32], nx: usize, ny: usize) -> VoxelGrid {
        let mut g = VoxelGrid::new(Point3::origin(), [1.0; 3], [nx, ny, 1]).unwrap();
        g.values = values.to_vec();
        g
    }

    fn pixels(path: &Path) -> Vec<u8> {
        let bytes = fs::read(path).unwrap();
        let header_end = bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == b'\n')
            .nth(2)
            .unwrap()
            .0;
        bytes[header_end + 1..].to_vec()
    }

    #[test]
    fn empty_soup_writes_no_records() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.obj");
        export_obj(&TriangleSoup::default(), &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "");
        assert_eq!(read_obj(&p).unwrap(), TriangleSoup::default());
    }

    #[test]
    fn single_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.obj");
        let soup = TriangleSoup {
            vertices: vec![
                Point3::origin(),
                Point3::new(1., 0., 0.),
                Point3::new(0., 1., 0.),
            ],
            triangles: vec![[0, 1, 2]],
        };
        export_obj(&soup, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().last(), Some("f 1 2 3"));
        assert_eq!(read_obj(&p).unwrap(), soup);
    }

    #[test]
    fn sphere_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.obj");
        let c = Point3::new(0.5, 0.5, 0.5);
        let mut g = make_grid(&Point3::origin(), &Point3::new(1., 1., 1.), 32, 0.0).unwrap();
        sample_field(&|q: &Point3| (q - c).norm() - 0.3, &mut g, 0);
        let soup = marching_cubes(&g, 0.0);
        export_obj(&soup, &p).unwrap();
        let back = read_obj(&p).unwrap();
        assert_eq!(back.vertices.len(), soup.vertices.len());
        assert_eq!(back.triangles, soup.triangles);
        for (a, b) in back.vertices.iter().zip(&soup.vertices) {
            assert!((a - b).norm() <= 1e-6);
        }
    }

    #[test]
    fn read_obj_rejects_bad_faces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.obj");
        fs::write(&p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n").unwrap();
        assert!(matches!(read_obj(&p), Err(Error::Parse { line: 4, .. })));
        fs::write(
            &p,
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1/1 2/2 3/3 4/4\n",
        )
        .unwrap();
        assert!(read_obj(&p).is_err());
        fs::write(&p, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(read_obj(&p).unwrap().triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn contour_obj_uses_line_elements() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.obj");
        let set = marching_squares(&flat(&[1.0, -1.0, -1.0, -1.0], 2, 2), 0.0).unwrap();
        export_contours_obj(&set, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 2);
        assert_eq!(text.lines().last(), Some("l 1 2"));
    }

    #[test]
    fn pgm_extremes_and_midpoint() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        export_pgm(&flat(&[-1.0; 6], 3, 2), &p, -1.0, 1.0).unwrap();
        assert!(fs::read(&p).unwrap().starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(pixels(&p), vec![0; 6]);
        export_pgm(&flat(&[1.0; 6], 3, 2), &p, -1.0, 1.0).unwrap();
        assert_eq!(pixels(&p), vec![255; 6]);
        export_pgm(&flat(&[0.0; 6], 3, 2), &p, -1.0, 1.0).unwrap();
        assert_eq!(pixels(&p), vec![128; 6]);
        // clamped, and row 0 of the image is the top of the grid
        export_pgm(&flat(&[-5.0, -5.0, 5.0, 5.0], 2, 2), &p, -1.0, 1.0).unwrap();
        assert_eq!(pixels(&p), vec![255, 255, 0, 0]);
    }

    #[test]
    fn pgm_rejects_bad_range_and_volumes() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        assert!(export_pgm(&flat(&[0.0; 4], 2, 2), &p, 1.0, 1.0).is_err());
        let g = VoxelGrid::cube(Point3::origin(), 1.0, 2).unwrap();
        assert!(export_pgm(&g, &p, 0.0, 1.0).is_err());
    }
}
