//! Planar primitives shared by every other module: points, angles on the
//! unit circle, circles, and the handful of predicates built on them.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Default relative tolerance. Lengths are compared at `DEFAULT_EPS * R`.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector with polar angle `theta`.
    pub fn from_polar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point2 { x: c, y: s }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    /// Polar angle in `(-pi, pi]`.
    pub fn polar(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    fn lex_cmp(&self, o: &Point2) -> Ordering {
        self.x.total_cmp(&o.x).then(self.y.total_cmp(&o.y))
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// An angle, stored as its representative in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub fn new(value: f64) -> Self {
        Angle(canonical_angle(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 2pi)`.
    pub fn ccw_to(self, other: Angle) -> f64 {
        canonical_angle(other.0 - self.0)
    }
}

/// Reduce `value` to `[0, 2pi)`.
pub fn canonical_angle(value: f64) -> f64 {
    let r = value.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Lift `value` by a multiple of `2pi` into `[center - pi, center + pi)`.
pub fn lift_near(value: f64, center: f64) -> f64 {
    value - TAU * ((value - center + PI) / TAU).floor()
}

/// Counterclockwise arc of angles starting at `start` and spanning `extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleInterval {
    pub start: Angle,
    pub extent: f64,
}

impl AngleInterval {
    pub fn new(start: f64, extent: f64) -> Self {
        AngleInterval {
            start: Angle::new(start),
            extent: extent.clamp(0.0, TAU),
        }
    }

    /// Interval between two lifted values `lo <= hi`.
    pub fn from_lifted(lo: f64, hi: f64) -> Self {
        AngleInterval::new(lo, hi - lo)
    }

    pub fn full() -> Self {
        AngleInterval {
            start: Angle(0.0),
            extent: TAU,
        }
    }

    pub fn is_full(&self) -> bool {
        self.extent >= TAU
    }

    pub fn end(&self) -> f64 {
        self.start.0 + self.extent
    }

    pub fn mid(&self) -> f64 {
        self.start.0 + 0.5 * self.extent
    }

    /// Whether `angle` lies in the closed interval, with slack `eps` at both ends.
    pub fn contains(&self, angle: f64, eps: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let off = canonical_angle(angle - self.start.0);
        off <= self.extent + eps || off >= TAU - eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2, radius: f64) -> Self {
        debug_assert!(radius > 0.0);
        Circle { center, radius }
    }

    pub fn point_at(&self, angle: f64) -> Point2 {
        self.center + Point2::from_polar(angle) * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn reversed(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Orientation of the triangle `abc` with the default tolerance.
pub fn orient(a: Point2, b: Point2, c: Point2) -> Sign {
    orient_eps(a, b, c, DEFAULT_EPS)
}

/// Orientation of the triangle `abc`. The signed area is compared against
/// `eps` times the squared longest side, so the result is scale invariant.
///
/// The cross product is always evaluated on the lexicographically sorted
/// triple, which makes the result exactly antisymmetric under swaps.
pub fn orient_eps(a: Point2, b: Point2, c: Point2, eps: f64) -> Sign {
    let mut pts = [a, b, c];
    let mut parity = false;
    // three-element sorting network, tracking permutation parity
    for (i, j) in [(0, 1), (1, 2), (0, 1)] {
        if pts[i].lex_cmp(&pts[j]) == Ordering::Greater {
            pts.swap(i, j);
            parity = !parity;
        }
    }
    let [p, q, r] = pts;
    let area2 = (q - p).cross(r - p);
    let scale = (q - p)
        .norm_sq()
        .max((r - p).norm_sq())
        .max((r - q).norm_sq());
    let sign = if area2.abs() <= eps * scale {
        Sign::Zero
    } else if area2 > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    };
    if parity {
        sign.reversed()
    } else {
        sign
    }
}

/// Convex hull in counterclockwise order, collinear points dropped.
///
/// Degenerate inputs produce degenerate hulls: a single point, or the two
/// extreme points of a collinear set.
pub fn convex_hull(points: &[Point2]) -> Result<Vec<Point2>, Error> {
    convex_hull_eps(points, DEFAULT_EPS)
}

pub fn convex_hull_eps(points: &[Point2], eps: f64) -> Result<Vec<Point2>, Error> {
    Ok(convex_hull_indices(points, eps)?
        .into_iter()
        .map(|i| points[i])
        .collect())
}

/// Like [`convex_hull_eps`] but returns indices into `points`.
pub fn convex_hull_indices(points: &[Point2], eps: f64) -> Result<Vec<usize>, Error> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| points[i].lex_cmp(&points[j]));
    idx.dedup_by(|i, j| points[*i] == points[*j]);
    if idx.len() < 3 {
        return Ok(idx);
    }
    let mut hull: Vec<usize> = Vec::with_capacity(idx.len() + 1);
    // lower chain, then upper chain
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2 {
                let o = orient_eps(
                    points[hull[hull.len() - 2]],
                    points[hull[hull.len() - 1]],
                    points[i],
                    eps,
                );
                if o == Sign::Positive {
                    break;
                }
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // all collinear: keep the two extremes
        return Ok(vec![idx[0], idx[idx.len() - 1]]);
    }
    Ok(hull)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Outside,
    Boundary,
    Inside,
}

/// Locate `p` relative to a convex polygon given in counterclockwise order.
/// Degenerate polygons (point, segment) only ever report `Boundary` or
/// `Outside`. `eps` is an absolute distance tolerance.
pub fn locate_in_convex_polygon(poly: &[Point2], p: Point2, eps: f64) -> Containment {
    match poly.len() {
        0 => Containment::Outside,
        1 => {
            if poly[0].dist(p) <= eps {
                Containment::Boundary
            } else {
                Containment::Outside
            }
        }
        2 => {
            if point_segment_distance(p, poly[0], poly[1]) <= eps {
                Containment::Boundary
            } else {
                Containment::Outside
            }
        }
        n => {
            let mut on_edge = false;
            for k in 0..n {
                let a = poly[k];
                let b = poly[(k + 1) % n];
                let len = a.dist(b);
                let signed = (b - a).cross(p - a) / len;
                if signed < -eps {
                    return Containment::Outside;
                }
                if signed <= eps && point_segment_distance(p, a, b) <= eps {
                    on_edge = true;
                }
            }
            if on_edge {
                Containment::Boundary
            } else {
                Containment::Inside
            }
        }
    }
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Result of intersecting two circles.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCrossing {
    /// Intersection points with their angle on the first circle. With two
    /// points, the counterclockwise arc of the first circle from point 0 to
    /// point 1 lies inside the second disk.
    pub points: Vec<(Point2, Angle)>,
    /// The circles touch at a single point; a general-position violation.
    pub tangent: bool,
}

pub fn circle_circle_intersections(c1: &Circle, c2: &Circle) -> Result<CircleCrossing, Error> {
    circle_circle_intersections_eps(c1, c2, DEFAULT_EPS)
}

/// `eps` is relative to the larger radius.
pub fn circle_circle_intersections_eps(
    c1: &Circle,
    c2: &Circle,
    eps: f64,
) -> Result<CircleCrossing, Error> {
    let tol = eps * c1.radius.max(c2.radius);
    let delta = c2.center - c1.center;
    let d = delta.norm();
    if d <= tol && (c1.radius - c2.radius).abs() <= tol {
        return Err(Error::CoincidentCircles);
    }
    let none = CircleCrossing {
        points: Vec::new(),
        tangent: false,
    };
    if d <= tol {
        return Ok(none);
    }
    let beta = delta.polar();
    let sum = c1.radius + c2.radius;
    let diff = (c1.radius - c2.radius).abs();
    if (d - sum).abs() <= tol || (d - diff).abs() <= tol {
        // externally or internally tangent
        let angle = if (d - sum).abs() <= tol || c1.radius > c2.radius {
            beta
        } else {
            beta + PI
        };
        return Ok(CircleCrossing {
            points: vec![(c1.point_at(angle), Angle::new(angle))],
            tangent: true,
        });
    }
    if d > sum || d < diff {
        return Ok(none);
    }
    let cos_a = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2.0 * d * c1.radius);
    let half = cos_a.clamp(-1.0, 1.0).acos();
    let points = [beta - half, beta + half]
        .into_iter()
        .map(|a| (c1.point_at(a), Angle::new(a)))
        .collect();
    Ok(CircleCrossing {
        points,
        tangent: false,
    })
}

/// Portion of segment `[a, b]` inside the closed disk, as a parameter
/// interval `[t0, t1]` of `a + t (b - a)`.
pub fn clip_segment_to_disk(a: Point2, b: Point2, center: Point2, radius: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_sq();
    if qa == 0.0 {
        return (f.norm() <= radius).then_some((0.0, 0.0));
    }
    let qb = f.dot(d);
    let qc = f.norm_sq() - radius * radius;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // stable quadratic roots
    let (mut t0, mut t1) = if qb >= 0.0 {
        let q = -(qb + sq);
        (q / qa, if q != 0.0 { qc / q } else { 0.0 })
    } else {
        let q = -qb + sq;
        (if q != 0.0 { qc / q } else { 0.0 }, q / qa)
    };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let lo = t0.max(0.0);
    let hi = t1.min(1.0);
    (lo <= hi).then_some((lo, hi))
}
