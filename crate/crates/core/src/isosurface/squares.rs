//! Marching squares on single-slice grids.
//!
//! Cell corners are numbered 0:(i,j) 1:(i+1,j) 2:(i+1,j+1) 3:(i,j+1) and
//! edges e0:0-1 e1:1-2 e2:2-3 e3:3-0. A corner bit is set when its value is
//! at or above the iso-value.

use std::collections::HashMap;

use super::crossing;
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::Point3;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourSet {
    /// Closed loops repeat their first point at the end.
    pub polylines: Vec<Vec<Point3>>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.polylines
            .iter()
            .flat_map(|l| l.windows(2))
            .map(|w| (w[1] - w[0]).norm())
            .sum()
    }
}

// (horizontal?, i, j) of the lattice edge
type EdgeKey = (bool, usize, usize);

fn edge_key(e: usize, i: usize, j: usize) -> EdgeKey {
    match e {
        0 => (true, i, j),
        1 => (false, i + 1, j),
        2 => (true, i, j + 1),
        _ => (false, i, j),
    }
}

fn segments_for(case: usize, center_above: bool) -> &'static [[usize; 2]] {
    match case {
        1 | 14 => &[[3, 0]],
        2 | 13 => &[[0, 1]],
        3 | 12 => &[[3, 1]],
        4 | 11 => &[[1, 2]],
        6 | 9 => &[[0, 2]],
        7 | 8 => &[[2, 3]],
        5 if center_above => &[[0, 1], [2, 3]],
        5 => &[[3, 0], [1, 2]],
        10 if center_above => &[[3, 0], [1, 2]],
        10 => &[[0, 1], [2, 3]],
        _ => &[],
    }
}

pub fn marching_squares(grid: &VoxelGrid, iso: f64) -> Result<ContourSet> {
    let [nx, ny, nz] = grid.dims;
    if nz != 1 {
        return Err(Error::InvalidParameter(format!(
            "marching squares needs a single-slice grid, got nz = {nz}"
        )));
    }
    let value = |i: usize, j: usize| f64::from(grid.get(i, j, 0));

    let mut points: HashMap<EdgeKey, Point3> = HashMap::new();
    let mut segments: Vec<[EdgeKey; 2]> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let vals = corners.map(|(a, b)| value(a, b));
            let case = vals
                .iter()
                .enumerate()
                .filter(|(_, &v)| v >= iso)
                .fold(0usize, |acc, (c, _)| acc | (1 << c));
            let center_above = vals.iter().sum::<f64>() / 4.0 >= iso;
            for seg in segments_for(case, center_above) {
                let keys = seg.map(|e| {
                    let key = edge_key(e, i, j);
                    points.entry(key).or_insert_with(|| {
                        let (horizontal, a, b) = key;
                        let (c, d) = if horizontal { (a + 1, b) } else { (a, b + 1) };
                        crossing(
                            &grid.position(a, b, 0),
                            &grid.position(c, d, 0),
                            value(a, b),
                            value(c, d),
                            iso,
                        )
                    });
                    key
                });
                segments.push(keys);
            }
        }
    }

    let mut incident: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for key in seg {
            incident.entry(*key).or_default().push(s);
        }
    }
    let other = |s: usize, key: EdgeKey| {
        let seg = segments[s];
        if seg[0] == key {
            seg[1]
        } else {
            seg[0]
        }
    };
    let mut used = vec![false; segments.len()];
    // walk from `key` away from segment `from`, marking segments as used
    let walk = |used: &mut Vec<bool>, mut from: usize, mut key: EdgeKey| {
        let mut chain = Vec::new();
        while let Some(&next) = incident[&key].iter().find(|&&s| s != from && !used[s]) {
            used[next] = true;
            key = other(next, key);
            chain.push(key);
            from = next;
        }
        chain
    };

    let mut polylines = Vec::new();
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        used[s] = true;
        let [a, b] = segments[s];
        let forward = walk(&mut used, s, b);
        let closed = forward.last() == Some(&a);
        let mut keys: Vec<EdgeKey> = if closed {
            vec![a]
        } else {
            let mut back = walk(&mut used, s, a);
            back.reverse();
            back.push(a);
            back
        };
        keys.push(b);
        keys.extend(forward);
        polylines.push(keys.iter().map(|k| points[k]).collect());
    }
    Ok(ContourSet { polylines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid_2d, sample_field};
    use std::f64::consts::PI;

    fn cell(values: [f32; 4]) -> VoxelGrid {
        let mut g = VoxelGrid::new(Point3::origin(), [1.0, 1.0, 1.0], [2, 2, 1]).unwrap();
        g.values = vec![values[0], values[1], values[3], values[2]];
        g
    }

    #[test]
    fn uniform_field_is_empty() {
        assert!(marching_squares(&cell([1.0; 4]), 0.0).unwrap().is_empty());
        assert!(marching_squares(&cell([-1.0; 4]), 0.0).unwrap().is_empty());
    }

    #[test]
    fn one_corner_above_gives_one_segment() {
        for c in 0..4 {
            let mut v = [-1.0f32; 4];
            v[c] = 1.0;
            let set = marching_squares(&cell(v), 0.0).unwrap();
            assert_eq!(set.polylines.len(), 1);
            assert_eq!(set.polylines[0].len(), 2);
            assert!((set.total_length() - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_resolved_by_center_average() {
        // corners 0 and 2 above
        let joined = marching_squares(&cell([1.0, -0.5, 1.0, -0.5]), 0.0).unwrap();
        let split = marching_squares(&cell([0.5, -1.0, 0.5, -1.0]), 0.0).unwrap();
        assert_eq!(joined.polylines.len(), 2);
        assert_eq!(split.polylines.len(), 2);
        // above-center: the low corners 1 and 3 are cut off
        let near = |set: &ContourSet, q: Point3| {
            set.polylines
                .iter()
                .any(|l| l.iter().all(|p| (p - q).norm() < 0.75))
        };
        assert!(near(&joined, Point3::new(1.0, 0.0, 0.0)));
        assert!(near(&joined, Point3::new(0.0, 1.0, 0.0)));
        assert!(near(&split, Point3::origin()));
        assert!(near(&split, Point3::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn circle_length() {
        let radius = 0.35;
        let c = Point3::new(0.5, 0.5, 0.0);
        let mut g = make_grid_2d(&Point3::origin(), &Point3::new(1.0, 1.0, 0.0), 256, 0.0).unwrap();
        sample_field(&|p: &Point3| (p - c).norm() - radius, &mut g, 0);
        let set = marching_squares(&g, 0.0).unwrap();
        assert_eq!(set.polylines.len(), 1);
        let line = &set.polylines[0];
        assert_eq!(line.first(), line.last());
        let exact = 2.0 * PI * radius;
        assert!(((set.total_length() - exact) / exact).abs() < 0.03);
        assert!(line.iter().all(|p| p.z == 0.0));
    }

    #[test]
    fn open_chains_end_on_the_boundary() {
        // a line crossing the domain
        let mut g = make_grid_2d(&Point3::origin(), &Point3::new(1.0, 1.0, 0.0), 32, 0.0).unwrap();
        sample_field(&|p: &Point3| p.x + 0.5 * p.y - 0.6, &mut g, 0);
        let set = marching_squares(&g, 0.0).unwrap();
        assert_eq!(set.polylines.len(), 1);
        let line = &set.polylines[0];
        assert!(line.len() > 2);
        assert_ne!(line.first(), line.last());
        let exact = (1.0f64 + 0.25).sqrt();
        assert!((set.total_length() - exact).abs() < 1e-5);
    }

    #[test]
    fn rejects_volumes() {
        let g = VoxelGrid::cube(Point3::origin(), 1.0, 3).unwrap();
        assert!(marching_squares(&g, 0.0).is_err());
    }
}
