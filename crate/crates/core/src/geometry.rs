//! Planar points and polyline distance helpers.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A point in the world plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        ((other.x - self.x).powi(2) + (other.y - self.y).powi(2)).sqrt()
    }
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == T::zero() {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2)
        .max(T::zero())
        .min(T::one());
    p.distance(&Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Minimum distance from `p` to a polyline. A single vertex degenerates to point distance.
pub fn point_polyline_distance<T: Real>(p: Point2<T>, polyline: &[Point2<T>]) -> Option<T> {
    match polyline {
        [] => None,
        [only] => Some(p.distance(only)),
        _ => polyline
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .reduce(T::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_projects_inside_and_clamps_outside() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(2.0, 0.0);
        assert_eq!(point_segment_distance(Point2::new(1.0, 0.7), a, b), 0.7);
        assert_eq!(point_segment_distance(Point2::new(3.0, 0.0), a, b), 1.0);
        assert_eq!(point_segment_distance(Point2::new(-3.0, 4.0), a, b), 5.0);
    }

    #[test]
    fn polyline_distance_uses_segments_not_vertices() {
        let line = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)];
        assert_eq!(point_polyline_distance(Point2::new(5.0, 0.25), &line), Some(0.25));
        assert_eq!(point_polyline_distance::<f64>(Point2::new(5.0, 0.25), &[]), None);
    }
}
