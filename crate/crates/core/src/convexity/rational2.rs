//! Exact planar geometry over arbitrary-precision rationals.
//!
//! Everything here is decision-exact: orientation tests, convex hulls,
//! point-in-hull membership, and line intersections use BigRational with no
//! rounding anywhere. Degenerate inputs (collinear sets, repeated points,
//! single points) are first-class since safe areas routinely collapse to
//! segments or points.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

pub type Point2 = [BigRational; 2];

pub fn point2(x: BigRational, y: BigRational) -> Point2 {
    [x, y]
}

pub fn point2_int(x: i64, y: i64) -> Point2 {
    [
        BigRational::from(BigInt::from(x)),
        BigRational::from(BigInt::from(y)),
    ]
}

/// Sign of the cross product (b - a) x (c - a): >0 left turn, 0 collinear.
pub fn orient(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    let v = (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0]);
    v.cmp(&BigRational::zero())
}

fn on_segment(a: &Point2, b: &Point2, p: &Point2) -> bool {
    if orient(a, b, p) != Ordering::Equal {
        return false;
    }
    let within = |lo: &BigRational, hi: &BigRational, v: &BigRational| {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        lo <= v && v <= hi
    };
    within(&a[0], &b[0], &p[0]) && within(&a[1], &b[1], &p[1])
}

/// A convex polygon in counterclockwise order, possibly degenerate:
/// 1 vertex = point, 2 vertices = segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Monotone-chain hull. Interior and duplicate points are dropped;
    /// collinear inputs produce the extreme segment.
    pub fn hull_of(points: &[Point2]) -> ConvexPolygon {
        let mut pts: Vec<Point2> = points.to_vec();
        pts.sort_by(|a, b| a[0].cmp(&b[0]).then_with(|| a[1].cmp(&b[1])));
        pts.dedup();
        if pts.len() <= 2 {
            return ConvexPolygon { vertices: pts };
        }
        let mut lower: Vec<Point2> = Vec::new();
        for p in pts.iter() {
            while lower.len() >= 2
                && orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p) != Ordering::Greater
            {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Point2> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2
                && orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p) != Ordering::Greater
            {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        if lower.len() == 2 && lower[0] == lower[1] {
            lower.pop();
        }
        ConvexPolygon { vertices: lower }
    }

    pub fn contains(&self, p: &Point2) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => &self.vertices[0] == p,
            2 => on_segment(&self.vertices[0], &self.vertices[1], p),
            n => {
                for i in 0..n {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % n];
                    if orient(a, b, p) == Ordering::Less {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Edges as (endpoint, endpoint) pairs; a point has none, a segment one.
    pub fn edges(&self) -> Vec<(Point2, Point2)> {
        match self.vertices.len() {
            0 | 1 => Vec::new(),
            2 => vec![(self.vertices[0].clone(), self.vertices[1].clone())],
            n => (0..n)
                .map(|i| (self.vertices[i].clone(), self.vertices[(i + 1) % n].clone()))
                .collect(),
        }
    }
}

/// Intersection point of lines (a1,a2) and (b1,b2); None if parallel,
/// coincident, or either pair is degenerate.
pub fn line_intersection(a1: &Point2, a2: &Point2, b1: &Point2, b2: &Point2) -> Option<Point2> {
    let d1 = [&a2[0] - &a1[0], &a2[1] - &a1[1]];
    let d2 = [&b2[0] - &b1[0], &b2[1] - &b1[1]];
    if (d1[0].is_zero() && d1[1].is_zero()) || (d2[0].is_zero() && d2[1].is_zero()) {
        return None;
    }
    let den = &d1[0] * &d2[1] - &d1[1] * &d2[0];
    if den.is_zero() {
        return None;
    }
    let dx = [&b1[0] - &a1[0], &b1[1] - &a1[1]];
    let t = (&dx[0] * &d2[1] - &dx[1] * &d2[0]) / &den;
    Some([&a1[0] + &t * &d1[0], &a1[1] + &t * &d1[1]])
}

/// Exact convex-combination feasibility: p in hull(points)?
pub fn in_hull(points: &[Point2], p: &Point2) -> bool {
    ConvexPolygon::hull_of(points).contains(p)
}

/// Total bit on magnitude growth checks.
pub fn coord_abs_max(p: &Point2) -> BigRational {
    let ax = p[0].abs();
    let ay = p[1].abs();
    if ax >= ay {
        ax
    } else {
        ay
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_membership() {
        let tri = vec![point2_int(0, 0), point2_int(2, 0), point2_int(0, 2)];
        assert!(in_hull(&tri, &point2_int(1, 1))); // boundary
        assert!(in_hull(&tri, &point2_int(0, 0)));
        assert!(!in_hull(&tri, &point2_int(2, 2)));
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!(in_hull(&tri, &point2(half.clone(), half)));
    }

    #[test]
    fn degenerate_hulls() {
        let seg = vec![point2_int(0, 0), point2_int(4, 4), point2_int(2, 2)];
        let hull = ConvexPolygon::hull_of(&seg);
        assert_eq!(hull.vertices.len(), 2);
        assert!(hull.contains(&point2_int(3, 3)));
        assert!(!hull.contains(&point2_int(3, 2)));

        let pt = vec![point2_int(5, 5), point2_int(5, 5)];
        let hull = ConvexPolygon::hull_of(&pt);
        assert_eq!(hull.vertices.len(), 1);
        assert!(hull.contains(&point2_int(5, 5)));
        assert!(!hull.contains(&point2_int(5, 6)));
    }

    #[test]
    fn line_intersection_exact() {
        // x + y = 2 meets y = x at (1, 1)
        let p = line_intersection(
            &point2_int(2, 0),
            &point2_int(0, 2),
            &point2_int(0, 0),
            &point2_int(5, 5),
        )
        .unwrap();
        assert_eq!(p, point2_int(1, 1));
        // parallel
        assert!(line_intersection(
            &point2_int(0, 0),
            &point2_int(1, 0),
            &point2_int(0, 1),
            &point2_int(1, 1),
        )
        .is_none());
    }
}
