//! Distance kernels used by the interpolation matrix.
//!
//! Three kinds are needed: the usual Euclidean point-to-point distance, the
//! distance from a point to a segment, and a segment-to-segment distance which
//! is defined as the smallest of the four endpoint-to-endpoint distances. The
//! latter is intentionally *not* the geometric distance between two segments:
//! two crossing segments with far-apart endpoints are not at distance zero.

use std::cmp::Ordering;

use crate::Point3;

/// Residual below which a point is reported as lying on a segment.
pub const ON_SEGMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    PointPoint,
    PointSegment,
    SegmentSegment,
}

#[inline]
pub fn point_point(p: &Point3, q: &Point3) -> f64 {
    (p - q).norm()
}

/// Distance from `x` to the segment `(a, b)`.
///
/// Uses the projection parameter `t` of `x` onto the line through `a` and `b`:
/// for `t` in `[0, 1]` the foot of the perpendicular lies on the segment and
/// the perpendicular length is returned, otherwise the nearer endpoint wins.
/// A zero-length segment degrades to [`point_point`].
pub fn point_segment(x: &Point3, a: &Point3, b: &Point3) -> f64 {
    // canonical endpoint order so that (a, b) and (b, a) agree bit for bit
    let (a, b) = if lex_cmp(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return point_point(x, a);
    }
    let to_a = point_point(x, a);
    let to_b = point_point(x, b);
    let t = (x - a).dot(&ab) / len2;
    if (0.0..=1.0).contains(&t) {
        let foot = a + ab * t;
        let d = point_point(x, &foot);
        if d < ON_SEGMENT_TOL {
            0.0
        } else {
            d.min(to_a).min(to_b)
        }
    } else {
        to_a.min(to_b)
    }
}

/// Smallest endpoint-to-endpoint distance between `(a, b)` and `(c, d)`.
pub fn segment_segment(a: &Point3, b: &Point3, c: &Point3, d: &Point3) -> f64 {
    point_point(a, c)
        .min(point_point(a, d))
        .min(point_point(b, c))
        .min(point_point(b, d))
}

fn lex_cmp(p: &Point3, q: &Point3) -> Ordering {
    p.x.total_cmp(&q.x)
        .then(p.y.total_cmp(&q.y))
        .then(p.z.total_cmp(&q.z))
}
