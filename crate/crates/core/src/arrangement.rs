//! The arrangement of the circles `C_i` of radius `R` around the footholds:
//! neighbour lists, size statistics and general-position checks.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::geom::{circle_circle_intersections_eps, point_segment_distance, Circle, Point2};
use crate::par::{map_range, Execution};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
    /// Angles `(theta1, theta3)` on `C_i0` where `C_index` crosses it, lifted
    /// so that `theta1 < theta3` and the arc between them lies in the other disk.
    pub crossing: Option<(f64, f64)>,
}

/// For each foothold, the footholds at distance in `(0, 2R)`, by index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub lists: Vec<Vec<Neighbor>>,
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn neighbors(&self, i0: usize) -> &[Neighbor] {
        &self.lists[i0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArrangementStats {
    pub n: usize,
    pub intersecting_pairs: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
}

impl ArrangementStats {
    /// `|A|`, the total number of vertices and edges.
    pub fn size(&self) -> usize {
        self.vertex_count + self.edge_count
    }
}

pub fn build_neighbor_table(scene: &Scene) -> Result<NeighborTable> {
    build_neighbor_table_with(scene, Execution::Parallel)
}

pub fn build_neighbor_table_with(scene: &Scene, exec: Execution) -> Result<NeighborTable> {
    let pts = scene.require_points()?;
    let r = scene.reach;
    let lists = map_range(pts.len(), exec, |i0| {
        let c0 = Circle::new(pts[i0], r);
        let mut out = Vec::new();
        for (i, s) in pts.iter().enumerate() {
            let d = pts[i0].dist(*s);
            if i == i0 || d <= 0.0 || d >= 2.0 * r {
                continue;
            }
            let crossing = circle_circle_intersections_eps(&c0, &Circle::new(*s, r), scene.eps)
                .ok()
                .filter(|c| c.points.len() == 2)
                .map(|_| {
                    let beta = (*s - pts[i0]).polar();
                    let half = (d / (2.0 * r)).clamp(-1.0, 1.0).acos();
                    (beta - half, beta + half)
                });
            out.push(Neighbor { index: i, dist: d, crossing });
        }
        out
    });
    Ok(NeighborTable { lists })
}

pub fn arrangement_stats(table: &NeighborTable) -> ArrangementStats {
    let mut ordered = 0;
    let mut edges = 0;
    for list in &table.lists {
        let vertices_here = list.iter().filter(|nb| nb.crossing.is_some()).count() * 2;
        ordered += list.iter().filter(|nb| nb.crossing.is_some()).count();
        edges += vertices_here.max(1);
    }
    let pairs = ordered / 2;
    ArrangementStats {
        n: table.len(),
        intersecting_pairs: pairs,
        vertex_count: 2 * pairs,
        edge_count: edges,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GpViolation {
    Duplicate { i: usize, j: usize },
    DistanceR { i: usize, j: usize },
    Distance2R { i: usize, j: usize },
    TriplePoint { circles: [usize; 3], at: Point2 },
    TwoCirclesSegment { circles: [usize; 2], segment: [usize; 2], at: Point2 },
    CircleTwoSegments { circle: usize, segments: [[usize; 2]; 2], at: Point2 },
}

impl fmt::Display for GpViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpViolation::Duplicate { i, j } => write!(f, "duplicate footholds {i} and {j}"),
            GpViolation::DistanceR { i, j } => write!(f, "distance R between footholds {i} and {j}"),
            GpViolation::Distance2R { i, j } => write!(f, "distance 2R between footholds {i} and {j}"),
            GpViolation::TriplePoint { circles: [a, b, c], at } => {
                write!(f, "circles {a}, {b}, {c} meet at {at}")
            }
            GpViolation::TwoCirclesSegment { circles: [a, b], segment: [k, l], at } => {
                write!(f, "circles {a}, {b} and segment ({k},{l}) meet at {at}")
            }
            GpViolation::CircleTwoSegments { circle, segments: [[a, b], [c, d]], at } => {
                write!(f, "circle {circle} and segments ({a},{b}), ({c},{d}) meet at {at}")
            }
        }
    }
}

/// Report general-position violations with the scene tolerance.
pub fn validate_general_position(scene: &Scene) -> Result<Vec<GpViolation>> {
    validate_general_position_tol(scene, scene.eps)
}

/// Report general-position violations; `eps` is relative to `R`.
pub fn validate_general_position_tol(scene: &Scene, eps: f64) -> Result<Vec<GpViolation>> {
    let pts = scene.require_points()?;
    let r = scene.reach;
    let tol = eps * r;
    let n = pts.len();
    let mut out = Vec::new();

    for i in 0..n {
        for j in i + 1..n {
            let d = pts[i].dist(pts[j]);
            if d <= tol {
                out.push(GpViolation::Duplicate { i, j });
            } else if (d - r).abs() <= tol {
                out.push(GpViolation::DistanceR { i, j });
            } else if (d - 2.0 * r).abs() <= tol {
                out.push(GpViolation::Distance2R { i, j });
            }
        }
    }

    let near = |q: Point2, limit: f64| -> Vec<usize> {
        (0..n).filter(|&k| pts[k].dist(q) <= limit).collect()
    };
    // segments that can carry part of the boundary join footholds within 2R
    let segments: Vec<[usize; 2]> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| [i, j]))
        .filter(|&[i, j]| pts[i].dist(pts[j]) < 2.0 * r - tol)
        .collect();

    for i in 0..n {
        for j in i + 1..n {
            let d = pts[i].dist(pts[j]);
            if d <= tol || d >= 2.0 * r - tol {
                continue;
            }
            let Ok(cx) = circle_circle_intersections_eps(&Circle::new(pts[i], r), &Circle::new(pts[j], r), eps)
            else {
                continue;
            };
            for &(x, _) in &cx.points {
                for k in near(x, r + 2.0 * tol) {
                    if k > j && (pts[k].dist(x) - r).abs() <= tol {
                        out.push(GpViolation::TriplePoint { circles: [i, j, k], at: x });
                    }
                }
                for &[k, l] in &segments {
                    if pts[k].dist(x) > 2.0 * r && pts[l].dist(x) > 2.0 * r {
                        continue;
                    }
                    if point_segment_distance(x, pts[k], pts[l]) <= tol {
                        out.push(GpViolation::TwoCirclesSegment { circles: [i, j], segment: [k, l], at: x });
                    }
                }
            }
        }
    }

    for (a, &[i, j]) in segments.iter().enumerate() {
        for &[k, l] in &segments[a + 1..] {
            if i == k || i == l || j == k || j == l {
                continue;
            }
            let Some(x) = segment_crossing(pts[i], pts[j], pts[k], pts[l]) else {
                continue;
            };
            for c in near(x, r + 2.0 * tol) {
                if (pts[c].dist(x) - r).abs() <= tol {
                    out.push(GpViolation::CircleTwoSegments {
                        circle: c,
                        segments: [[i, j], [k, l]],
                        at: x,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Intersection point of two closed segments that cross at a single point.
pub(crate) fn segment_crossing(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den == 0.0 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    let u = (c - a).cross(r) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a + r * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn scene(pts: &[(f64, f64)]) -> Scene {
        Scene::points(1.0, pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn neighbor_examples() {
        let t = build_neighbor_table(&scene(&[(0., 0.), (0.5, 0.)])).unwrap();
        assert_eq!(t.neighbors(0)[0].index, 1);
        assert_eq!(t.neighbors(1)[0].index, 0);
        assert!((t.neighbors(0)[0].dist - 0.5).abs() < 1e-15);

        let t = build_neighbor_table(&scene(&[(0., 0.), (3., 0.)])).unwrap();
        assert!(t.neighbors(0).is_empty() && t.neighbors(1).is_empty());

        let t = build_neighbor_table(&scene(&[(0., 0.), (1., 0.)])).unwrap();
        let (t1, t3) = t.neighbors(0)[0].crossing.unwrap();
        assert!((t1 + PI / 3.0).abs() < 1e-12 && (t3 - PI / 3.0).abs() < 1e-12);
        // just past theta1 and just before theta3 the circle point is in the other disk
        let c0 = Circle::new(Point2::ORIGIN, 1.0);
        for a in [t1 + 1e-6, t3 - 1e-6] {
            assert!(c0.point_at(a).dist(Point2::new(1., 0.)) < 1.0);
        }
    }

    #[test]
    fn stats_examples() {
        let s = arrangement_stats(&build_neighbor_table(&scene(&[(0., 0.), (0.5, 0.)])).unwrap());
        assert_eq!((s.vertex_count, s.edge_count), (2, 4));
        let s = arrangement_stats(&build_neighbor_table(&scene(&[(0., 0.), (5., 0.), (10., 0.)])).unwrap());
        assert_eq!((s.vertex_count, s.edge_count), (0, 3));
    }

    #[test]
    fn stats_match_pair_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pts: Vec<(f64, f64)> = (0..10).map(|_| (rng.random(), rng.random())).collect();
            let sc = scene(&pts);
            let t = build_neighbor_table(&sc).unwrap();
            let s = arrangement_stats(&t);
            let mut pairs = 0;
            for i in 0..10 {
                for j in i + 1..10 {
                    let d = Point2::new(pts[i].0, pts[i].1).dist(Point2::new(pts[j].0, pts[j].1));
                    if d > 0.0 && d < 2.0 {
                        pairs += 1;
                    }
                }
            }
            assert_eq!(s.vertex_count, 2 * pairs);
        }
    }

    #[test]
    fn table_is_symmetric_and_angles_lie_on_both_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(f64, f64)> = (0..30)
            .map(|_| (rng.random_range(0.0..4.0), rng.random_range(0.0..4.0)))
            .collect();
        let sc = scene(&pts);
        let p = sc.point_footholds().unwrap();
        let t = build_neighbor_table(&sc).unwrap();
        for (i0, list) in t.lists.iter().enumerate() {
            for nb in list {
                assert!(t.neighbors(nb.index).iter().any(|m| m.index == i0));
                let (a, b) = nb.crossing.unwrap();
                for ang in [a, b] {
                    let q = Circle::new(p[i0], 1.0).point_at(ang);
                    assert!((q.dist(p[nb.index]) - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn gp_examples() {
        let v = validate_general_position(&scene(&[(0., 0.), (2., 0.)])).unwrap();
        assert_eq!(v, vec![GpViolation::Distance2R { i: 0, j: 1 }]);
        assert_eq!(v[0].to_string(), "distance 2R between footholds 0 and 1");
        let v = validate_general_position(&scene(&[(0., 0.), (1., 0.)])).unwrap();
        assert!(v.contains(&GpViolation::DistanceR { i: 0, j: 1 }));
        let v = validate_general_position(&scene(&[(0., 0.), (0.5, 0.1), (1.1, -0.3)])).unwrap();
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn gp_detects_concurrences() {
        // three circles through the origin
        let pts: Vec<(f64, f64)> = (0..3)
            .map(|k| {
                let a = 0.3 + k as f64 * 2.0;
                (a.cos(), a.sin())
            })
            .collect();
        let v = validate_general_position(&scene(&pts)).unwrap();
        assert!(v.iter().any(|x| matches!(x, GpViolation::TriplePoint { .. })));

        // a segment through the upper crossing of C_0 and C_1
        let y = (1.0 - (0.5005f64).powi(2)).sqrt();
        let v = validate_general_position(&scene(&[(0., 0.), (1.001, 0.), (0.2, y), (0.8, y)])).unwrap();
        assert!(v.iter().any(|x| matches!(x, GpViolation::TwoCirclesSegment { .. })), "{v:?}");

        // segments (1,2) and (3,4) cross at (0.8, 0.6), on the unit circle around foothold 0
        let v = validate_general_position(&scene(&[(0., 0.), (0.5, 0.3), (1.1, 0.9), (0.5, 0.9), (1.1, 0.3)])).unwrap();
        assert!(v.iter().any(|x| matches!(x, GpViolation::CircleTwoSegments { circle: 0, .. })), "{v:?}");
    }
}
