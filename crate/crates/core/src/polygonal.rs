//! Polygonal foothold regions: the stability predicate, sampled free space
//! `F = F_e U S`, and the 2-contact tracings of a ladder of length `2R`
//! whose relevant parts support the boundary of `F_e`.

use std::f64::consts::TAU;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geom::{clip_segment_to_disk, convex_hull_eps, locate_in_convex_polygon, orient, point_segment_distance, Containment, Point2, Sign};
use crate::io::Num;
use crate::par::{map_slice, Execution};
use crate::scene::Scene;
use crate::stability::{sample_grid, Bbox, OccupancyGrid, StabilityVerdict};

/// Relative interior of a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: Point2,
    pub b: Point2,
    pub polygon: usize,
}

/// A polygon vertex; coincident vertices form a single corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub p: Point2,
    pub walls: Vec<usize>,
}

pub fn walls(scene: &Scene) -> Vec<Wall> {
    let Some(polys) = scene.polygon_list() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (k, poly) in polys.iter().enumerate() {
        let n = poly.len();
        let count = if n == 2 { 1 } else { n };
        for m in 0..count {
            out.push(Wall {
                a: poly[m],
                b: poly[(m + 1) % n],
                polygon: k,
            });
        }
    }
    out
}

pub fn corners(walls: &[Wall]) -> Vec<Corner> {
    let mut out: Vec<Corner> = Vec::new();
    for (w, wall) in walls.iter().enumerate() {
        for p in [wall.a, wall.b] {
            match out.iter_mut().find(|c| c.p == p) {
                Some(c) => {
                    if !c.walls.contains(&w) {
                        c.walls.push(w)
                    }
                }
                None => out.push(Corner { p, walls: vec![w] }),
            }
        }
    }
    out
}

/// First pair of walls that cross or overlap other than at a shared endpoint.
pub fn first_crossing(walls: &[Wall]) -> Option<(usize, usize)> {
    for i in 0..walls.len() {
        for j in i + 1..walls.len() {
            if walls_conflict(&walls[i], &walls[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

fn walls_conflict(w1: &Wall, w2: &Wall) -> bool {
    let shared = [w1.a, w1.b].iter().filter(|p| **p == w2.a || **p == w2.b).count();
    let o = |a, b, c| orient(a, b, c);
    let (d1, d2) = (o(w1.a, w1.b, w2.a), o(w1.a, w1.b, w2.b));
    let (d3, d4) = (o(w2.a, w2.b, w1.a), o(w2.a, w2.b, w1.b));
    if shared >= 1 {
        // adjacent walls conflict only when they overlap along a line
        if shared == 2 {
            return true;
        }
        let collinear = d1 == Sign::Zero && d2 == Sign::Zero;
        if !collinear {
            return false;
        }
        let (p, q1, q2) = if w1.a == w2.a || w1.a == w2.b {
            (w1.a, w1.b, if w1.a == w2.a { w2.b } else { w2.a })
        } else {
            (w1.b, w1.a, if w1.b == w2.a { w2.b } else { w2.a })
        };
        return (q1 - p).dot(q2 - p) > 0.0;
    }
    if d1 != d2 && d3 != d4 && d1 != Sign::Zero && d2 != Sign::Zero && d3 != Sign::Zero && d4 != Sign::Zero {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2| point_segment_distance(p, a, b) == 0.0;
    on(w1.a, w1.b, w2.a) || on(w1.a, w1.b, w2.b) || on(w2.a, w2.b, w1.a) || on(w2.a, w2.b, w1.b)
}

/// Convex hull of the foothold points within reach of `p`.
pub fn reachable_hull(p: Point2, walls: &[Wall], reach: f64) -> Vec<Point2> {
    let mut pts = Vec::new();
    for w in walls {
        if let Some((t0, t1)) = clip_segment_to_disk(w.a, w.b, p, reach) {
            pts.push(w.a.lerp(w.b, t0));
            pts.push(w.a.lerp(w.b, t1));
        }
    }
    if pts.is_empty() {
        return pts;
    }
    convex_hull_eps(&pts, 1e-12).expect("nonempty")
}

/// Stable iff `p` lies in the hull of the reachable foothold points.
pub fn is_stable_segments(p: Point2, walls: &[Wall], reach: f64, eps: f64) -> StabilityVerdict {
    let hull = reachable_hull(p, walls, reach);
    match locate_in_convex_polygon(&hull, p, eps * reach) {
        Containment::Inside => StabilityVerdict::INTERIOR,
        Containment::Boundary => StabilityVerdict::MARGINAL,
        Containment::Outside => StabilityVerdict::UNSTABLE,
    }
}

/// Even-odd test against a simple polygon with at least three vertices.
pub fn point_in_polygon(poly: &[Point2], p: Point2) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let mut inside = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Stability in a polygonal scene: inside a foothold region, or stable
/// over the walls.
pub fn classify_polygonal(p: Point2, scene: &Scene) -> StabilityVerdict {
    let Some(polys) = scene.polygon_list() else {
        return StabilityVerdict::UNSTABLE;
    };
    let ws = walls(scene);
    let v = is_stable_segments(p, &ws, scene.reach, scene.eps);
    if v.stable {
        return v;
    }
    if polys.iter().any(|poly| point_in_polygon(poly, p)) {
        return StabilityVerdict::INTERIOR;
    }
    v
}

pub fn sample_freespace_polygonal(scene: &Scene, bbox: Bbox, nx: usize, ny: usize) -> Result<OccupancyGrid> {
    sample_freespace_polygonal_with(scene, bbox, nx, ny, Execution::Parallel)
}

pub fn sample_freespace_polygonal_with(
    scene: &Scene,
    bbox: Bbox,
    nx: usize,
    ny: usize,
    exec: Execution,
) -> Result<OccupancyGrid> {
    let polys = scene.require_polygons()?;
    let ws = walls(scene);
    sample_grid(bbox, nx, ny, exec, |p| {
        polys.iter().any(|poly| point_in_polygon(poly, p)) || is_stable_segments(p, &ws, scene.reach, scene.eps).stable
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    CircularArc,
    EllipseArc,
    ConchoidArc,
    Segment,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::CircularArc => "circular_arc",
            CurveKind::EllipseArc => "ellipse_arc",
            CurveKind::ConchoidArc => "conchoid_arc",
            CurveKind::Segment => "segment",
        }
    }
}

/// Features in contact with the ladder, by index into corners and walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactFeatures {
    /// (corner-endpoint): one ladder endpoint on the corner; parameter is
    /// the ladder direction.
    CornerEndpoint { corner: usize },
    /// (corner-ladder)^2: parameter `t` places the midpoint at
    /// `c1 + t * unit(c2 - c1)`.
    CornerCorner { c1: usize, c2: usize },
    /// (corner-ladder, wall-endpoint): parameter is the wall parameter of
    /// the endpoint `M`.
    CornerWall { corner: usize, wall: usize },
    /// (wall-endpoint)^2: parameter is the ladder direction, or for
    /// parallel walls the parameter along the first wall on one of two
    /// branches.
    WallWall { w1: usize, w2: usize, parallel_branch: Option<u8> },
}

/// A ladder placement on a 2-contact tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderPlacement {
    pub ends: [Point2; 2],
    pub midpoint: Point2,
    pub contacts: [Point2; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactCurve {
    pub kind: CurveKind,
    pub features: ContactFeatures,
    /// Parameter range on which the contact geometry is defined.
    pub range: (f64, f64),
    /// Sub-intervals of `range` where the placement is collision free.
    pub domain: Vec<(f64, f64)>,
    /// Sub-intervals of `domain` where the midpoint lies between the contacts.
    pub relevant: Vec<(f64, f64)>,
}

struct Geometry<'a> {
    walls: &'a [Wall],
    corners: &'a [Corner],
    polygons: &'a [Vec<Point2>],
    reach: f64,
}

impl Geometry<'_> {
    fn placement(&self, f: &ContactFeatures, s: f64) -> Option<LadderPlacement> {
        let r = self.reach;
        match *f {
            ContactFeatures::CornerEndpoint { corner } => {
                let c = self.corners[corner].p;
                let e2 = c + Point2::from_polar(s) * (2.0 * r);
                Some(LadderPlacement {
                    ends: [c, e2],
                    midpoint: c + Point2::from_polar(s) * r,
                    contacts: [c, c],
                })
            }
            ContactFeatures::CornerCorner { c1, c2 } => {
                let (p1, p2) = (self.corners[c1].p, self.corners[c2].p);
                let d = p1.dist(p2);
                if s < d - r || s > r {
                    return None;
                }
                let e = (p2 - p1) * (1.0 / d);
                let q = p1 + e * s;
                Some(LadderPlacement {
                    ends: [q - e * r, q + e * r],
                    midpoint: q,
                    contacts: [p1, p2],
                })
            }
            ContactFeatures::CornerWall { corner, wall } => {
                let c = self.corners[corner].p;
                let w = self.walls[wall];
                let m = w.a.lerp(w.b, s);
                let v = c - m;
                let dist = v.norm();
                if !(0.0..1.0).contains(&s) && s != 1.0 || dist <= 0.0 || dist > 2.0 * r {
                    return None;
                }
                let u = v * (1.0 / dist);
                Some(LadderPlacement {
                    ends: [m, m + u * (2.0 * r)],
                    midpoint: m + u * r,
                    contacts: [m, c],
                })
            }
            ContactFeatures::WallWall { w1, w2, parallel_branch } => {
                let (a, b) = (self.walls[w1], self.walls[w2]);
                let d1 = a.b - a.a;
                let d2 = b.b - b.a;
                let (m, n) = match parallel_branch {
                    None => {
                        // a.a + s1 d1 + 2R u = b.a + s2 d2
                        let u = Point2::from_polar(s) * (2.0 * r);
                        let rhs = b.a - a.a - u;
                        let den = d1.cross(d2);
                        if den == 0.0 {
                            return None;
                        }
                        let s1 = rhs.cross(d2) / den;
                        let s2 = rhs.cross(d1) / den;
                        if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) {
                            return None;
                        }
                        (a.a + d1 * s1, b.a + d2 * s2)
                    }
                    Some(branch) => {
                        if !(0.0..=1.0).contains(&s) {
                            return None;
                        }
                        let m = a.a + d1 * s;
                        // |b.a + t d2 - m| = 2R
                        let f = b.a - m;
                        let qa = d2.norm_sq();
                        let qb = f.dot(d2);
                        let qc = f.norm_sq() - 4.0 * r * r;
                        let disc = qb * qb - qa * qc;
                        if disc < 0.0 {
                            return None;
                        }
                        let sq = disc.sqrt();
                        let t = if branch == 0 { (-qb - sq) / qa } else { (-qb + sq) / qa };
                        if !(0.0..=1.0).contains(&t) {
                            return None;
                        }
                        (m, b.a + d2 * t)
                    }
                };
                Some(LadderPlacement {
                    ends: [m, n],
                    midpoint: m.lerp(n, 0.5),
                    contacts: [m, n],
                })
            }
        }
    }

    /// No part of the ladder lies strictly inside a foothold region.
    fn is_free(&self, lp: &LadderPlacement) -> bool {
        let (p, q) = (lp.ends[0], lp.ends[1]);
        let d = q - p;
        let len = d.norm();
        let tol = 1e-9 * self.reach;
        let slack = tol / len;
        let mut ts = vec![0.0, 1.0];
        for w in self.walls {
            let e = w.b - w.a;
            let den = d.cross(e);
            if den == 0.0 {
                continue;
            }
            let t = (w.a - p).cross(e) / den;
            let s = (w.a - p).cross(d) / den;
            let s_slack = tol / e.norm();
            if (-slack..=1.0 + slack).contains(&t) && (-s_slack..=1.0 + s_slack).contains(&s) {
                ts.push(t.clamp(0.0, 1.0));
            }
        }
        // corners on the ladder split it even when rounding misses a wall
        for poly in self.polygons {
            for &v in poly {
                if point_segment_distance(v, p, q) <= tol {
                    ts.push(((v - p).dot(d) / (len * len)).clamp(0.0, 1.0));
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.windows(2).all(|w| {
            if (w[1] - w[0]) * len <= tol {
                return true;
            }
            let m = p.lerp(q, 0.5 * (w[0] + w[1]));
            !self.polygons.iter().any(|poly| {
                point_in_polygon(poly, m) && !on_polygon_boundary(poly, m, tol)
            })
        })
    }

    fn relevant(&self, f: &ContactFeatures, s: f64) -> bool {
        match *f {
            ContactFeatures::CornerEndpoint { .. } => false,
            ContactFeatures::WallWall { .. } => true,
            ContactFeatures::CornerCorner { c1, c2 } => {
                let d = self.corners[c1].p.dist(self.corners[c2].p);
                (0.0..=d).contains(&s)
            }
            ContactFeatures::CornerWall { corner, wall } => {
                let w = self.walls[wall];
                self.corners[corner].p.dist(w.a.lerp(w.b, s)) >= self.reach
            }
        }
    }
}

fn on_polygon_boundary(poly: &[Point2], p: Point2, tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|k| point_segment_distance(p, poly[k], poly[(k + 1) % n]) <= tol)
}

const DOMAIN_SAMPLES: usize = 512;
/// Parameter intervals shorter than this fraction of the range are
/// rounding artefacts of tangential placements.
const MIN_PARAM_LEN: f64 = 1e-6;

/// Maximal sub-intervals of `[lo, hi]` where `pred` holds, located by
/// sampling and refined by bisection.
fn intervals_where(pred: &dyn Fn(f64) -> bool, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let at = |k: usize| lo + (hi - lo) * k as f64 / DOMAIN_SAMPLES as f64;
    let refine = |mut a: f64, mut b: f64, a_val: bool| {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if pred(m) == a_val {
                a = m;
            } else {
                b = m;
            }
        }
        if a_val {
            a
        } else {
            b
        }
    };
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut prev = pred(lo);
    if prev {
        start = Some(lo);
    }
    for k in 1..=DOMAIN_SAMPLES {
        let x = at(k);
        let cur = pred(x);
        if cur != prev {
            let edge = refine(at(k - 1), x, prev);
            if cur {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                out.push((s, edge));
            }
        }
        prev = cur;
    }
    if let Some(s) = start {
        out.push((s, hi));
    }
    out
}

impl ContactCurve {
    pub fn placement(&self, scene_walls: &[Wall], scene_corners: &[Corner], reach: f64, s: f64) -> Option<LadderPlacement> {
        let g = Geometry {
            walls: scene_walls,
            corners: scene_corners,
            polygons: &[],
            reach,
        };
        g.placement(&self.features, s)
    }

    pub fn is_relevant_at(&self, s: f64) -> bool {
        self.relevant.iter().any(|&(a, b)| a <= s && s <= b)
    }

    /// `count` parameters spread evenly over the domain.
    pub fn sample_params(&self, count: usize) -> Vec<f64> {
        let total: f64 = self.domain.iter().map(|(a, b)| b - a).sum();
        if self.domain.is_empty() || count == 0 {
            return Vec::new();
        }
        (0..count)
            .map(|k| {
                let mut x = total * (k as f64 + 0.5) / count as f64;
                for &(a, b) in &self.domain {
                    if x <= b - a {
                        return a + x;
                    }
                    x -= b - a;
                }
                self.domain[self.domain.len() - 1].1
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    /// Degenerate polygons; curve generation refuses such scenes.
    pub h1: Vec<String>,
    /// 4-contact placements found at curve endpoints.
    pub h2: Vec<String>,
    /// Conchoid endpoint tracks tangent to a wall.
    pub h3: Vec<String>,
    /// 3-contact placements with the midpoint on a corner.
    pub h4: Vec<String>,
}

impl HypothesisReport {
    pub fn is_clean(&self) -> bool {
        self.h1.is_empty() && self.h2.is_empty() && self.h3.is_empty() && self.h4.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({ "H1": self.h1, "H2": self.h2, "H3": self.h3, "H4": self.h4 })
    }
}

/// Syntactic check of hypothesis H1: every region is a genuine polygon.
pub fn check_h1(scene: &Scene) -> Result<Vec<String>> {
    let polys = scene.require_polygons()?;
    let tol = scene.tol();
    let mut out = Vec::new();
    for (k, poly) in polys.iter().enumerate() {
        if poly.len() < 3 {
            out.push(format!("polygon {k} is reduced to a segment"));
            continue;
        }
        let n = poly.len();
        if (0..n).any(|m| poly[m].dist(poly[(m + 1) % n]) <= tol) {
            out.push(format!("polygon {k} has a repeated vertex"));
        }
        let area: f64 = (0..n).map(|m| poly[m].cross(poly[(m + 1) % n])).sum::<f64>() * 0.5;
        if area.abs() <= tol * tol {
            out.push(format!("polygon {k} has no area"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracings {
    pub walls: Vec<Wall>,
    pub corners: Vec<Corner>,
    pub reach: f64,
    pub curves: Vec<ContactCurve>,
    pub report: HypothesisReport,
}

pub fn two_contact_tracings(scene: &Scene) -> Result<Tracings> {
    two_contact_tracings_with(scene, Execution::Parallel)
}

pub fn two_contact_tracings_with(scene: &Scene, exec: Execution) -> Result<Tracings> {
    let polys = scene.require_polygons()?;
    let h1 = check_h1(scene)?;
    if !h1.is_empty() {
        return Err(Error::Hypothesis(format!("H1: {}", h1.join("; "))));
    }
    let ws = walls(scene);
    let cs = corners(&ws);
    let r = scene.reach;
    let geo = Geometry {
        walls: &ws,
        corners: &cs,
        polygons: polys,
        reach: r,
    };

    let mut candidates: Vec<(CurveKind, ContactFeatures, (f64, f64))> = Vec::new();
    for k in 0..cs.len() {
        candidates.push((CurveKind::CircularArc, ContactFeatures::CornerEndpoint { corner: k }, (0.0, TAU)));
    }
    for c1 in 0..cs.len() {
        for c2 in c1 + 1..cs.len() {
            let d = cs[c1].p.dist(cs[c2].p);
            if d < 2.0 * r {
                candidates.push((CurveKind::Segment, ContactFeatures::CornerCorner { c1, c2 }, (d - r, r)));
            }
        }
    }
    for (c, corner) in cs.iter().enumerate() {
        for (w, wall) in ws.iter().enumerate() {
            if point_segment_distance(corner.p, wall.a, wall.b) < 2.0 * r {
                candidates.push((CurveKind::ConchoidArc, ContactFeatures::CornerWall { corner: c, wall: w }, (0.0, 1.0)));
            }
        }
    }
    for w1 in 0..ws.len() {
        for w2 in w1 + 1..ws.len() {
            let (a, b) = (ws[w1], ws[w2]);
            if segment_distance(a.a, a.b, b.a, b.b) >= 2.0 * r {
                continue;
            }
            if (a.b - a.a).cross(b.b - b.a) == 0.0 {
                for branch in 0..2 {
                    let f = ContactFeatures::WallWall { w1, w2, parallel_branch: Some(branch) };
                    candidates.push((CurveKind::EllipseArc, f, (0.0, 1.0)));
                }
            } else {
                let f = ContactFeatures::WallWall { w1, w2, parallel_branch: None };
                candidates.push((CurveKind::EllipseArc, f, (0.0, TAU)));
            }
        }
    }

    let built = map_slice(&candidates, exec, |&(kind, features, range)| {
        let ok = |s: f64| geo.placement(&features, s).is_some_and(|lp| geo.is_free(&lp));
        let min_len = MIN_PARAM_LEN * (range.1 - range.0);
        let domain: Vec<(f64, f64)> = intervals_where(&ok, range.0, range.1)
            .into_iter()
            .filter(|(a, b)| b - a > min_len)
            .collect();
        if domain.is_empty() {
            return None;
        }
        let rel = |s: f64| ok(s) && geo.relevant(&features, s);
        let relevant = intervals_where(&rel, range.0, range.1)
            .into_iter()
            .filter(|(a, b)| b - a > min_len)
            .collect();
        Some(ContactCurve {
            kind,
            features,
            range,
            domain,
            relevant,
        })
    });
    let curves: Vec<ContactCurve> = built.into_iter().flatten().collect();
    let report = detect_hypotheses(&geo, &curves, scene.tol().max(1e-7 * r));
    Ok(Tracings {
        walls: ws,
        corners: cs,
        reach: r,
        curves,
        report: HypothesisReport { h1, ..report },
    })
}

fn segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if crate::arrangement::segment_crossing(a, b, c, d).is_some() {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Approximate detection of H2-H4 violations at curve domain endpoints.
fn detect_hypotheses(geo: &Geometry, curves: &[ContactCurve], tol: f64) -> HypothesisReport {
    let mut rep = HypothesisReport::default();
    for (k, c) in curves.iter().enumerate() {
        for &(a, b) in &c.domain {
            for s in [a, b] {
                let Some(lp) = geo.placement(&c.features, s) else { continue };
                let contacts = contact_count(geo, &lp, tol);
                if contacts >= 4 {
                    rep.h2.push(format!("curve {k}: {contacts}-contact placement at midpoint {}", lp.midpoint));
                }
                if contacts >= 3 && geo.corners.iter().any(|cn| cn.p.dist(lp.midpoint) <= tol) {
                    rep.h4.push(format!("curve {k}: 3-contact placement with midpoint on a corner at {}", lp.midpoint));
                }
            }
        }
        if c.kind == CurveKind::ConchoidArc {
            // the free endpoint's track grazing a wall
            let ps = c.sample_params(256);
            for w in 0..geo.walls.len() {
                let wall = geo.walls[w];
                let dist: Vec<f64> = ps
                    .iter()
                    .filter_map(|&s| geo.placement(&c.features, s))
                    .map(|lp| point_segment_distance(lp.ends[1], wall.a, wall.b))
                    .collect();
                for m in 1..dist.len().saturating_sub(1) {
                    if dist[m] <= 1e3 * tol && dist[m] > 0.0 && dist[m] < dist[m - 1] && dist[m] < dist[m + 1] {
                        rep.h3.push(format!("curve {k}: endpoint track tangent to wall {w}"));
                        break;
                    }
                }
            }
        }
    }
    rep
}

fn contact_count(geo: &Geometry, lp: &LadderPlacement, tol: f64) -> usize {
    let (p, q) = (lp.ends[0], lp.ends[1]);
    let corner_hits = geo
        .corners
        .iter()
        .filter(|c| point_segment_distance(c.p, p, q) <= tol)
        .count();
    let wall_hits = geo
        .walls
        .iter()
        .filter(|w| {
            let end_on = [p, q].iter().any(|e| point_segment_distance(*e, w.a, w.b) <= tol);
            let near_corner = geo.corners.iter().any(|c| {
                (c.p.dist(w.a) <= tol || c.p.dist(w.b) <= tol) && point_segment_distance(c.p, p, q) <= tol
            });
            end_on && !near_corner
        })
        .count();
    corner_hits + wall_hits
}

impl Tracings {
    /// Curves with 128 sampled midpoints each and a relevance flag per sample.
    pub fn to_json(&self) -> Value {
        let curves: Vec<Value> = self
            .curves
            .iter()
            .map(|c| {
                let samples: Vec<Value> = c
                    .sample_params(128)
                    .into_iter()
                    .filter_map(|s| {
                        c.placement(&self.walls, &self.corners, self.reach, s)
                            .map(|lp| json!([Num(lp.midpoint.x), Num(lp.midpoint.y), c.is_relevant_at(s)]))
                    })
                    .collect();
                let iv = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| [Num(a), Num(b)]).collect::<Vec<_>>();
                json!({
                    "kind": c.kind.name(),
                    "features": features_json(&c.features),
                    "range": [Num(c.range.0), Num(c.range.1)],
                    "domain": iv(&c.domain),
                    "relevant": iv(&c.relevant),
                    "samples": samples,
                })
            })
            .collect();
        json!({ "curves": curves, "hypotheses": self.report.to_json() })
    }
}

fn features_json(f: &ContactFeatures) -> Value {
    match *f {
        ContactFeatures::CornerEndpoint { corner } => json!({ "corners": [corner], "walls": [] }),
        ContactFeatures::CornerCorner { c1, c2 } => json!({ "corners": [c1, c2], "walls": [] }),
        ContactFeatures::CornerWall { corner, wall } => json!({ "corners": [corner], "walls": [wall] }),
        ContactFeatures::WallWall { w1, w2, parallel_branch } => {
            json!({ "corners": [], "walls": [w1, w2], "branch": parallel_branch })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn wall(a: Point2, b: Point2) -> Wall {
        Wall { a, b, polygon: 0 }
    }

    #[test]
    fn reachable_hull_examples() {
        let w = [wall(p(-2., -0.5), p(2., -0.5))];
        let h = reachable_hull(p(0., 0.), &w, 1.0);
        let x = 0.75f64.sqrt();
        assert_eq!(h.len(), 2);
        assert!(h.iter().any(|q| q.dist(p(-x, -0.5)) < 1e-12));
        assert!(h.iter().any(|q| q.dist(p(x, -0.5)) < 1e-12));
        assert!(reachable_hull(p(0., 5.), &w, 1.0).is_empty());
        let h = reachable_hull(p(0., -0.5), &w, 1.0);
        assert_ne!(locate_in_convex_polygon(&h, p(0., -0.5), 1e-12), Containment::Outside);
    }

    #[test]
    fn stability_examples() {
        let below = [wall(p(-2., -0.5), p(2., -0.5))];
        assert!(!is_stable_segments(p(0., 0.), &below, 1.0, 1e-9).stable);
        let both = [wall(p(-1., -0.5), p(1., -0.5)), wall(p(-1., 0.5), p(1., 0.5))];
        assert_eq!(is_stable_segments(p(0., 0.), &both, 1.0, 1e-9), StabilityVerdict::INTERIOR);
        assert!(is_stable_segments(p(0., -0.5), &below, 1.0, 1e-9).stable);
    }

    fn square(x: f64, y: f64, side: f64) -> Vec<Point2> {
        vec![p(x, y), p(x + side, y), p(x + side, y + side), p(x, y + side)]
    }

    #[test]
    fn sampling_examples() {
        let s = Scene::polygons(1.0, vec![square(0., 0., 1.)]).unwrap();
        let bbox = Bbox::new(p(-5., -5.), p(6., 6.)).unwrap();
        let g = sample_freespace_polygonal(&s, bbox, 110, 110).unwrap();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let c = g.cell_center(i, j);
                let inside = (0.0..=1.0).contains(&c.x) && (0.0..=1.0).contains(&c.y);
                assert_eq!(g.get(i, j), inside, "{c}");
            }
        }

        let s = Scene::polygons(1.0, vec![square(0., 0., 1.), square(2.5, 0., 1.)]).unwrap();
        let bbox = Bbox::new(p(-1., -1.), p(4.5, 2.)).unwrap();
        let g = sample_freespace_polygonal(&s, bbox, 110, 60).unwrap();
        // between the squares only where both facing walls are in reach
        for i in 0..g.nx {
            let c = g.cell_center(i, 30);
            if c.x > 1.0 && c.x < 2.5 {
                assert_eq!(g.get(i, 30), (1.5..=2.0).contains(&c.x), "{c}");
            }
        }

        let s = Scene::polygons(1.0, vec![]).unwrap();
        let g = sample_freespace_polygonal(&s, Bbox::new(p(0., 0.), p(1., 1.)).unwrap(), 5, 5).unwrap();
        assert_eq!(g.stable_count(), 0);
    }

    #[test]
    fn crossing_walls_are_rejected() {
        let bad = vec![vec![p(0., 0.), p(1., 1.), p(1., 0.), p(0., 1.)]];
        assert!(Scene::polygons(1.0, bad).is_err());
        let two = vec![square(0., 0., 1.), square(0.5, 0.5, 1.)];
        assert!(Scene::polygons(1.0, two).is_err());
        assert!(Scene::polygons(1.0, vec![square(0., 0., 1.), square(2., 0., 1.)]).is_ok());
    }

    #[test]
    fn h1_rejects_segments() {
        let s = Scene::polygons(1.0, vec![vec![p(0., 0.), p(1., 0.)]]).unwrap();
        assert!(matches!(two_contact_tracings(&s), Err(Error::Hypothesis(_))));
        // the predicate still works
        assert!(classify_polygonal(p(0.5, 0.), &s).stable);
    }

    /// Two triangles below the x-axis with top corners at (0,0) and (d,0).
    fn corner_pair(d: f64) -> Scene {
        Scene::polygons(
            1.0,
            vec![
                vec![p(0., 0.), p(-0.5, -0.5), p(0.2, -0.5)],
                vec![p(d, 0.), p(d - 0.2, -0.5), p(d + 0.5, -0.5)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn corner_corner_relevance_is_the_joining_segment() {
        let tr = two_contact_tracings(&corner_pair(0.8)).unwrap();
        let c0 = tr.corners.iter().position(|c| c.p == p(0., 0.)).unwrap();
        let c1 = tr.corners.iter().position(|c| c.p == p(0.8, 0.)).unwrap();
        let seg = tr
            .curves
            .iter()
            .find(|c| c.features == ContactFeatures::CornerCorner { c1: c0.min(c1), c2: c0.max(c1) })
            .unwrap();
        assert_eq!(seg.kind, CurveKind::Segment);
        assert_eq!(seg.relevant.len(), 1);
        let (a, b) = seg.relevant[0];
        assert!(a.abs() < 1e-9 && (b - 0.8).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn corner_endpoint_is_irrelevant() {
        let tr = two_contact_tracings(&corner_pair(0.8)).unwrap();
        let arcs: Vec<_> = tr.curves.iter().filter(|c| c.kind == CurveKind::CircularArc).collect();
        assert!(!arcs.is_empty());
        assert!(arcs.iter().all(|c| c.relevant.is_empty()));
    }

    #[test]
    fn far_corner_conchoid_is_wholly_relevant() {
        // corner (0, 1.5) of a thin triangle pointing left; wall y = 0 on top of a triangle below
        let s = Scene::polygons(
            1.0,
            vec![
                vec![p(0., 1.5), p(2., 1.6), p(2., 1.4)],
                vec![p(-3., 0.), p(0., -1.), p(3., 0.)],
            ],
        )
        .unwrap();
        let tr = two_contact_tracings(&s).unwrap();
        let corner = tr.corners.iter().position(|c| c.p == p(0., 1.5)).unwrap();
        let wall = tr.walls.iter().position(|w| w.a == p(3., 0.) && w.b == p(-3., 0.)).unwrap();
        let con = tr
            .curves
            .iter()
            .find(|c| c.features == ContactFeatures::CornerWall { corner, wall })
            .unwrap();
        assert_eq!(con.kind, CurveKind::ConchoidArc);
        assert_eq!(con.relevant, con.domain);
        for s in con.sample_params(100) {
            let lp = con.placement(&tr.walls, &tr.corners, 1.0, s).unwrap();
            assert!((lp.midpoint.dist(lp.contacts[0]) - 1.0).abs() < 1e-12);
            assert!(point_segment_distance(p(0., 1.5), lp.ends[0], lp.ends[1]) < 1e-12);
        }
    }

    #[test]
    fn ellipse_points_are_ladder_midpoints() {
        let s = Scene::polygons(1.0, vec![square(0., 0., 1.), vec![p(2.2, -1.), p(3., -1.), p(2.6, 2.)]]).unwrap();
        let tr = two_contact_tracings(&s).unwrap();
        let mut n = 0;
        for c in tr.curves.iter().filter(|c| c.kind == CurveKind::EllipseArc) {
            for s in c.sample_params(20) {
                let lp = c.placement(&tr.walls, &tr.corners, 1.0, s).unwrap();
                assert!((lp.ends[0].dist(lp.ends[1]) - 2.0).abs() < 1e-9);
                n += 1;
            }
        }
        assert!(n > 0);
        let v = tr.to_json();
        assert!(v["curves"].as_array().unwrap().iter().all(|c| c["samples"].as_array().unwrap().len() == 128));
    }
}
