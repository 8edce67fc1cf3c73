//! Planar polygon primitives shared by the layout machinery.
//!
//! Everything here works in rest/intrinsic coordinates (millimetres). Boolean
//! operations are delegated to `geo`; the thin [`Polygon2`] wrapper enforces
//! the invariants the sensor code relies on (simple, non-degenerate rings).

use geo::{Area, BooleanOps};
use nalgebra::Point2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("polygon is self-intersecting (edges {0} and {1} cross)")]
    SelfIntersecting(usize, usize),
    #[error("polygon is degenerate (area {0} mm^2)")]
    DegenerateArea(f64),
    #[error("polygon coordinates must be finite")]
    NonFinite,
}

/// A simple (non-self-intersecting) polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    points: Vec<Point2<f64>>,
}

impl Polygon2 {
    /// Builds a polygon, rejecting rings that are too short, degenerate or
    /// self-intersecting. The winding is normalized to counter-clockwise.
    pub fn new(mut points: Vec<Point2<f64>>) -> Result<Self, GeometryError> {
        // Drop a closing point identical to the first, then dedupe runs.
        if points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        points.dedup();
        if points.len() < 3 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        if points
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(GeometryError::NonFinite);
        }
        let mut poly = Self { points };
        let signed = poly.signed_area();
        let scale = poly.bbox_diagonal();
        if signed.abs() < 1e-12 * scale * scale {
            return Err(GeometryError::DegenerateArea(signed.abs()));
        }
        if signed < 0.0 {
            poly.points.reverse();
        }
        if let Some((i, j)) = poly.find_self_intersection() {
            return Err(GeometryError::SelfIntersecting(i, j));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle helper.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
        .expect("rectangle corners form a valid polygon")
    }

    pub fn points(&self) -> &[Point2<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area with sign (positive for counter-clockwise rings).
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            twice += a.x * b.y - b.x * a.y;
        }
        0.5 * twice
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2<f64> {
        let n = self.points.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let cross = a.x * b.y - b.x * a.y;
            twice += cross;
            cx += (a.x + b.x) * cross;
            cy += (a.y + b.y) * cross;
        }
        Point2::new(cx / (3.0 * twice), cy / (3.0 * twice))
    }

    pub fn bbox(&self) -> (Point2<f64>, Point2<f64>) {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    fn bbox_diagonal(&self) -> f64 {
        let (min, max) = self.bbox();
        (max - min).norm().max(1e-300)
    }

    /// Point-in-polygon by winding (boundary points count as inside).
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        let n = self.points.len();
        let mut winding = 0i32;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            if point_on_segment(p, &a, &b, 1e-9 * self.bbox_diagonal()) {
                return true;
            }
            if a.y <= p.y {
                if b.y > p.y && orient(&a, &b, p) > 0.0 {
                    winding += 1;
                }
            } else if b.y <= p.y && orient(&a, &b, p) < 0.0 {
                winding -= 1;
            }
        }
        winding != 0
    }

    /// Minimum distance from `p` to the polygon boundary.
    pub fn distance_to_boundary(&self, p: &Point2<f64>) -> f64 {
        let n = self.points.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            best = best.min(point_segment_distance(p, &a, &b));
        }
        best
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<f64>, Point2<f64>)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.points.len();
        for i in 0..n {
            let (a1, a2) = (self.points[i], self.points[(i + 1) % n]);
            for j in i + 1..n {
                // Skip edges sharing an endpoint.
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (b1, b2) = (self.points[j], self.points[(j + 1) % n]);
                if segments_properly_intersect(&a1, &a2, &b1, &b2) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_geo(&self) -> geo::Polygon<f64> {
        let ring: Vec<(f64, f64)> = self.points.iter().map(|p| (p.x, p.y)).collect();
        geo::Polygon::new(geo::LineString::from(ring), vec![])
    }

    fn from_geo_ring(ring: &geo::LineString<f64>) -> Result<Self, GeometryError> {
        let pts = ring.points().map(|p| Point2::new(p.x(), p.y())).collect();
        Self::new(pts)
    }
}

// The boolean kernel quantizes coordinates, so intersection areas carry a
// relative error around 1e-9; all thresholds below sit well above that.
const BOOLEAN_REL_TOL: f64 = 1e-7;

/// Intersection of two polygons as a list of connected components.
///
/// Components whose area is negligible relative to the inputs (touching
/// boundaries, quantization slivers) are dropped.
pub fn intersect(a: &Polygon2, b: &Polygon2) -> Result<Vec<Polygon2>, GeometryError> {
    let multi = a.to_geo().intersection(&b.to_geo());
    let floor = BOOLEAN_REL_TOL * a.area().min(b.area());
    let mut out = Vec::new();
    for poly in &multi {
        if poly.unsigned_area() <= floor {
            continue;
        }
        out.push(Polygon2::from_geo_ring(poly.exterior())?);
    }
    Ok(out)
}

/// True when the interiors of `a` and `b` are disjoint (touching boundaries
/// are allowed).
pub fn interiors_disjoint(a: &Polygon2, b: &Polygon2) -> bool {
    let multi = a.to_geo().intersection(&b.to_geo());
    multi.unsigned_area() <= BOOLEAN_REL_TOL * a.area().min(b.area())
}

/// True when every point of `inner` lies inside `outer`.
pub fn contains_polygon(outer: &Polygon2, inner: &Polygon2) -> bool {
    if !inner.points().iter().all(|p| outer.contains(p)) {
        return false;
    }
    // Vertex containment is not sufficient for concave outers; compare areas.
    let multi = outer.to_geo().intersection(&inner.to_geo());
    (multi.unsigned_area() - inner.area()).abs() <= BOOLEAN_REL_TOL * inner.area()
}

/// A representative interior point: the centroid when it lies inside,
/// otherwise the centroid of the largest fan triangle that does.
pub fn interior_point(poly: &Polygon2) -> Point2<f64> {
    let c = poly.centroid();
    if poly.contains(&c) {
        return c;
    }
    let pts = poly.points();
    let mut best = (f64::NEG_INFINITY, c);
    for i in 1..pts.len() - 1 {
        let tri_c = Point2::from((pts[0].coords + pts[i].coords + pts[i + 1].coords) / 3.0);
        let area = 0.5 * orient(&pts[0], &pts[i], &pts[i + 1]).abs();
        if poly.contains(&tri_c) && area > best.0 {
            best = (area, tri_c);
        }
    }
    best.1
}

fn orient(a: &Point2<f64>, b: &Point2<f64>, c: &Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn point_on_segment(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

pub(crate) fn point_segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_properly_intersect(
    a1: &Point2<f64>,
    a2: &Point2<f64>,
    b1: &Point2<f64>,
    b2: &Point2<f64>,
) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_area_and_centroid() {
        let r = Polygon2::rect(0.0, 0.0, 4.0, 2.0);
        assert_eq!(r.area(), 8.0);
        let c = r.centroid();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn winding_is_normalized() {
        let cw = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(cw.signed_area() > 0.0);
    }

    #[test]
    fn rejects_self_intersection() {
        // One edge dips through the bottom edge; net area stays nonzero.
        let crossed = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 2.0),
            Point2::new(1.0, -1.0),
            Point2::new(0.0, 2.0),
        ]);
        assert!(matches!(
            crossed,
            Err(GeometryError::SelfIntersecting(_, _))
        ));
    }

    #[test]
    fn rejects_degenerate() {
        let line = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ]);
        assert!(matches!(line, Err(GeometryError::DegenerateArea(_))));
    }

    #[test]
    fn contains_and_boundary() {
        let r = Polygon2::rect(0.0, 0.0, 2.0, 1.0);
        assert!(r.contains(&Point2::new(1.0, 0.5)));
        assert!(r.contains(&Point2::new(0.0, 0.5))); // boundary
        assert!(!r.contains(&Point2::new(2.5, 0.5)));
        assert!((r.distance_to_boundary(&Point2::new(1.0, 0.5)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlapping_rects_intersect_once() {
        let a = Polygon2::rect(0.0, 0.0, 2.0, 1.0);
        let b = Polygon2::rect(1.0, 0.0, 3.0, 1.0);
        let parts = intersect(&a, &b).unwrap();
        assert_eq!(parts.len(), 1);
        assert!((parts[0].area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_shape_intersects_bar_twice() {
        // A U-shaped subject crossed by a horizontal bar yields 2 components.
        let u = Polygon2::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ])
        .unwrap();
        let bar = Polygon2::rect(0.0, 2.0, 3.0, 2.5);
        let parts = intersect(&u, &bar).unwrap();
        assert_eq!(parts.len(), 2);
    }

    #[test]
    fn disjoint_interiors() {
        let a = Polygon2::rect(0.0, 0.0, 1.0, 1.0);
        let b = Polygon2::rect(1.0, 0.0, 2.0, 1.0); // shares an edge
        let c = Polygon2::rect(0.5, 0.0, 2.0, 1.0);
        assert!(interiors_disjoint(&a, &b));
        assert!(!interiors_disjoint(&a, &c));
    }
}
