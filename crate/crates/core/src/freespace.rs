//! Exact free space over point footholds: circular arcs from the torus
//! envelopes, corners at hull footholds, segment edges recovered by sorting
//! the vertices on each labelled segment, all linked into closed loops.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde_json::{json, Value};

use crate::arrangement::{arrangement_stats, build_neighbor_table_with, validate_general_position, ArrangementStats, NeighborTable};
use crate::envelope::{circle_boundary_arcs_full, EndLabel, LabeledArc};
use crate::error::{Error, Result};
use crate::geom::{canonical_angle, convex_hull_indices, point_segment_distance, AngleInterval, Point2};
use crate::io::{point_json, Num};
use crate::par::{map_range, Execution};
use crate::scene::Scene;
use crate::stability::{is_stable_point_footholds, StabilityVerdict};

/// Offset, relative to `R`, used to tell the inside of an edge from the outside.
const SIDE_OFFSET: f64 = 1e-7;
/// Distance, relative to `R`, under which two boundary vertices are the same.
pub const EPS_MATCH: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryEdge {
    /// Arc of `C_i` traversed from angle `a0` to `a1` (clockwise when `a1 < a0`).
    Arc { i: usize, a0: f64, a1: f64 },
    /// Part of segment `s_i + t (s_j - s_i)` traversed from `t0` to `t1`.
    Seg { i: usize, j: usize, t0: f64, t1: f64 },
}

impl BoundaryEdge {
    /// Point at fraction `s` in `[0, 1]` along the traversal.
    pub fn point_at(&self, pts: &[Point2], reach: f64, s: f64) -> Point2 {
        match *self {
            BoundaryEdge::Arc { i, a0, a1 } => pts[i] + Point2::from_polar(a0 + (a1 - a0) * s) * reach,
            BoundaryEdge::Seg { i, j, t0, t1 } => pts[i].lerp(pts[j], t0 + (t1 - t0) * s),
        }
    }

    pub fn start(&self, pts: &[Point2], reach: f64) -> Point2 {
        self.point_at(pts, reach, 0.0)
    }

    pub fn end(&self, pts: &[Point2], reach: f64) -> Point2 {
        self.point_at(pts, reach, 1.0)
    }

    pub fn midpoint(&self, pts: &[Point2], reach: f64) -> Point2 {
        self.point_at(pts, reach, 0.5)
    }

    /// Arc interval on `C_i`, counterclockwise.
    pub fn interval(&self) -> Option<AngleInterval> {
        match *self {
            BoundaryEdge::Arc { a0, a1, .. } => Some(AngleInterval::from_lifted(a0.min(a1), a0.max(a1))),
            BoundaryEdge::Seg { .. } => None,
        }
    }

    pub fn length(&self, pts: &[Point2], reach: f64) -> f64 {
        match *self {
            BoundaryEdge::Arc { a0, a1, .. } => (a1 - a0).abs() * reach,
            BoundaryEdge::Seg { i, j, t0, t1 } => (t1 - t0).abs() * pts[i].dist(pts[j]),
        }
    }

    pub fn distance(&self, pts: &[Point2], reach: f64, p: Point2) -> f64 {
        match *self {
            BoundaryEdge::Arc { i, a0, a1 } => {
                let (lo, hi) = (a0.min(a1), a0.max(a1));
                let v = p - pts[i];
                let off = canonical_angle(v.polar() - lo);
                if off <= hi - lo && v.norm() > 0.0 {
                    (v.norm() - reach).abs()
                } else {
                    let e0 = pts[i] + Point2::from_polar(lo) * reach;
                    let e1 = pts[i] + Point2::from_polar(hi) * reach;
                    p.dist(e0).min(p.dist(e1))
                }
            }
            BoundaryEdge::Seg { .. } => {
                point_segment_distance(p, self.start(pts, reach), self.end(pts, reach))
            }
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bbox(&self, pts: &[Point2], reach: f64) -> (Point2, Point2) {
        let (a, b) = (self.start(pts, reach), self.end(pts, reach));
        let mut lo = Point2::new(a.x.min(b.x), a.y.min(b.y));
        let mut hi = Point2::new(a.x.max(b.x), a.y.max(b.y));
        if let BoundaryEdge::Arc { i, a0, a1 } = *self {
            let (from, to) = (a0.min(a1), a0.max(a1));
            for k in 0..4 {
                let ang = k as f64 * TAU / 4.0;
                if canonical_angle(ang - from) <= to - from || to - from >= TAU {
                    let q = pts[i] + Point2::from_polar(ang) * reach;
                    lo = Point2::new(lo.x.min(q.x), lo.y.min(q.y));
                    hi = Point2::new(hi.x.max(q.x), hi.y.max(q.y));
                }
            }
        }
        (lo, hi)
    }

    /// Crossings of the ray `p + t dir`, `t > 0`, counted half-open along
    /// the traversal.
    fn ray_crossings(&self, pts: &[Point2], reach: f64, p: Point2, dir: Point2) -> usize {
        match *self {
            BoundaryEdge::Seg { .. } => {
                let a = self.start(pts, reach);
                let b = self.end(pts, reach);
                let e = b - a;
                let den = dir.cross(e);
                if den == 0.0 {
                    return 0;
                }
                let w = a - p;
                let t = w.cross(e) / den;
                let s = w.cross(dir) / den;
                usize::from(t > 0.0 && (0.0..1.0).contains(&s))
            }
            BoundaryEdge::Arc { i, a0, a1 } => {
                let c = pts[i];
                let f = p - c;
                let b = f.dot(dir);
                let disc = b * b - (f.norm_sq() - reach * reach);
                if disc <= 0.0 {
                    return 0;
                }
                let sq = disc.sqrt();
                let mut n = 0;
                for t in [-b - sq, -b + sq] {
                    if t <= 0.0 {
                        continue;
                    }
                    let ang = (f + dir * t).polar();
                    let span = a1 - a0;
                    let off = if span >= 0.0 {
                        canonical_angle(ang - a0)
                    } else {
                        canonical_angle(a0 - ang)
                    };
                    if span.abs() >= TAU || off < span.abs() {
                        n += 1;
                    }
                }
                n
            }
        }
    }
}

/// A foothold that is a corner of the hull of the footholds it reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct HullFoothold {
    pub index: usize,
    /// Segment labels of the hull edges at this foothold; empty when it
    /// reaches no other foothold.
    pub incident_labels: Vec<EndLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpaceStats {
    pub arrangement: ArrangementStats,
    pub boundary_edges: usize,
    pub arcs_per_circle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpace {
    pub reach: f64,
    pub footholds: Vec<Point2>,
    /// Closed loops, interior on the left.
    pub loops: Vec<Vec<BoundaryEdge>>,
    pub isolated_points: Vec<Point2>,
    pub isolated_segments: Vec<BoundaryEdge>,
    /// Arcs with no free space on either side; empty in general position.
    pub isolated_arcs: Vec<BoundaryEdge>,
    pub hull_footholds: Vec<HullFoothold>,
    pub stats: FreeSpaceStats,
    pub diagnostics: Vec<String>,
}

impl FreeSpace {
    pub fn edges(&self) -> impl Iterator<Item = &BoundaryEdge> {
        self.loops
            .iter()
            .flatten()
            .chain(&self.isolated_segments)
            .chain(&self.isolated_arcs)
    }

    /// Number of boundary features: edges plus isolated points.
    pub fn edge_count(&self) -> usize {
        self.edges().count() + self.isolated_points.len()
    }

    /// Distance from `p` to the nearest boundary feature.
    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        let e = self
            .edges()
            .map(|e| e.distance(&self.footholds, self.reach, p))
            .fold(f64::INFINITY, f64::min);
        self.isolated_points.iter().map(|q| q.dist(p)).fold(e, f64::min)
    }

    /// Membership from the computed boundary: even-odd ray casting against
    /// the loops, plus the isolated features.
    pub fn contains_point(&self, p: Point2) -> bool {
        if self.distance_to_boundary(p) <= MEMBER_TOL * self.reach {
            return true;
        }
        let dir = Point2::from_polar(RAY_ANGLE);
        let crossings: usize = self
            .loops
            .iter()
            .flatten()
            .map(|e| e.ray_crossings(&self.footholds, self.reach, p, dir))
            .sum();
        crossings % 2 == 1
    }

    pub fn to_json(&self) -> Value {
        let edge = |e: &BoundaryEdge| match *e {
            BoundaryEdge::Arc { i, a0, a1 } => json!({"type": "arc", "i": i, "a0": Num(a0), "a1": Num(a1)}),
            BoundaryEdge::Seg { i, j, t0, t1 } => {
                json!({"type": "seg", "i": i, "j": j, "t0": Num(t0), "t1": Num(t1)})
            }
        };
        let a = &self.stats.arrangement;
        json!({
            "loops": self.loops.iter().map(|l| l.iter().map(edge).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "isolated_points": self.isolated_points.iter().map(|p| point_json(*p)).collect::<Vec<_>>(),
            "isolated_segments": self.isolated_segments.iter().map(edge).collect::<Vec<_>>(),
            "isolated_arcs": self.isolated_arcs.iter().map(edge).collect::<Vec<_>>(),
            "stats": {
                "n": a.n,
                "arrangement_vertices": a.vertex_count,
                "arrangement_edges": a.edge_count,
                "boundary_edges": self.stats.boundary_edges,
                "arcs_per_circle": self.stats.arcs_per_circle,
            },
        })
    }
}

/// Boundary within this distance, relative to `R`, counts as inside.
const MEMBER_TOL: f64 = 1e-9;
/// Direction of the membership ray, away from any axis.
const RAY_ANGLE: f64 = 0.123_456_789;

/// Bucketed boundary for many queries against one free space. Answers the
/// same questions as [`FreeSpace::distance_to_boundary`] (up to `band`) and
/// [`FreeSpace::contains_point`].
pub struct BoundaryIndex<'a> {
    fs: &'a FreeSpace,
    edges: Vec<BoundaryEdge>,
    boxes: Vec<(Point2, Point2)>,
    /// Number of leading `edges` that belong to loops.
    loop_edges: usize,
    band: f64,
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    /// Per bucket, edges (by index) and isolated points (by index offset by
    /// the edge count) whose box inflated by `band` meets the bucket.
    buckets: Vec<Vec<usize>>,
}

impl<'a> BoundaryIndex<'a> {
    pub fn new(fs: &'a FreeSpace, band: f64) -> BoundaryIndex<'a> {
        let band = band.max(MEMBER_TOL * fs.reach);
        let loop_edges = fs.loops.iter().map(Vec::len).sum();
        let edges: Vec<BoundaryEdge> = fs.edges().copied().collect();
        let mut boxes: Vec<(Point2, Point2)> = edges.iter().map(|e| e.bbox(&fs.footholds, fs.reach)).collect();
        boxes.extend(fs.isolated_points.iter().map(|&p| (p, p)));
        let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (a, b) in &boxes {
            lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
            hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
        }
        let cell = fs.reach.max(band);
        let (nx, ny) = if boxes.is_empty() {
            lo = Point2::ORIGIN;
            (1, 1)
        } else {
            lo = Point2::new(lo.x - band, lo.y - band);
            (
                ((hi.x + band - lo.x) / cell).floor() as usize + 1,
                ((hi.y + band - lo.y) / cell).floor() as usize + 1,
            )
        };
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, (a, b)) in boxes.iter().enumerate() {
            let i0 = ((a.x - band - lo.x) / cell).floor().max(0.0) as usize;
            let j0 = ((a.y - band - lo.y) / cell).floor().max(0.0) as usize;
            let i1 = (((b.x + band - lo.x) / cell).floor() as usize).min(nx - 1);
            let j1 = (((b.y + band - lo.y) / cell).floor() as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k);
                }
            }
        }
        BoundaryIndex {
            fs,
            edges,
            boxes,
            loop_edges,
            band,
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn bucket(&self, p: Point2) -> &[usize] {
        let i = ((p.x - self.origin.x) / self.cell).floor();
        let j = ((p.y - self.origin.y) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return &[];
        }
        &self.buckets[j as usize * self.nx + i as usize]
    }

    /// Distance to the nearest boundary feature if it is at most the band.
    pub fn distance_within_band(&self, p: Point2) -> Option<f64> {
        let fs = self.fs;
        let d = self
            .bucket(p)
            .iter()
            .map(|&k| match self.edges.get(k) {
                Some(e) => e.distance(&fs.footholds, fs.reach, p),
                None => fs.isolated_points[k - self.edges.len()].dist(p),
            })
            .fold(f64::INFINITY, f64::min);
        (d <= self.band).then_some(d)
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        let fs = self.fs;
        if self.distance_within_band(p).is_some_and(|d| d <= MEMBER_TOL * fs.reach) {
            return true;
        }
        let dir = Point2::from_polar(RAY_ANGLE);
        let mut crossings = 0;
        for (e, (lo, hi)) in self.edges[..self.loop_edges].iter().zip(&self.boxes) {
            let corners = [*lo, Point2::new(hi.x, lo.y), *hi, Point2::new(lo.x, hi.y)];
            let side: Vec<f64> = corners.iter().map(|c| dir.cross(*c - p)).collect();
            if side.iter().all(|&v| v > 0.0) || side.iter().all(|&v| v < 0.0) {
                continue;
            }
            if corners.iter().all(|c| dir.dot(*c - p) < 0.0) {
                continue;
            }
            crossings += e.ray_crossings(&fs.footholds, fs.reach, p, dir);
        }
        crossings % 2 == 1
    }
}

/// Membership by the stability predicate.
pub fn contains(scene: &Scene, p: Point2) -> StabilityVerdict {
    is_stable_point_footholds(p, scene)
}

/// Membership by the computed boundary.
pub fn point_in_freespace(fs: &FreeSpace, p: Point2) -> bool {
    fs.contains_point(p)
}

pub fn hull_vertex_footholds(scene: &Scene, table: &NeighborTable) -> Result<Vec<HullFoothold>> {
    hull_vertex_footholds_with(scene, table, Execution::Parallel)
}

fn hull_vertex_footholds_with(scene: &Scene, table: &NeighborTable, exec: Execution) -> Result<Vec<HullFoothold>> {
    let pts = scene.require_points()?;
    let found = map_range(pts.len(), exec, |s| -> Result<Option<HullFoothold>> {
        let mut local = vec![s];
        local.extend(table.neighbors(s).iter().filter(|nb| nb.dist < scene.reach).map(|nb| nb.index));
        let coords: Vec<Point2> = local.iter().map(|&k| pts[k]).collect();
        let hull = convex_hull_indices(&coords, scene.eps)?;
        if hull.len() == 1 {
            return Ok(Some(HullFoothold {
                index: s,
                incident_labels: Vec::new(),
            }));
        }
        let Some(pos) = hull.iter().position(|&h| h == 0) else {
            return Ok(None);
        };
        let m = hull.len();
        let prev = local[hull[(pos + m - 1) % m]];
        let next = local[hull[(pos + 1) % m]];
        let mut labels = vec![EndLabel::segment(s, prev), EndLabel::segment(s, next)];
        labels.dedup();
        Ok(Some(HullFoothold {
            index: s,
            incident_labels: labels,
        }))
    });
    Ok(found.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

pub fn compute_freespace(scene: &Scene) -> Result<FreeSpace> {
    compute_freespace_with(scene, Execution::Parallel)
}

pub fn compute_freespace_with(scene: &Scene, exec: Execution) -> Result<FreeSpace> {
    let pts = scene.require_points()?.to_vec();
    let violations = validate_general_position(scene)?;
    if !violations.is_empty() {
        return Err(Error::RejectedScene(violations));
    }
    let r = scene.reach;
    let eta = SIDE_OFFSET * r;
    let table = build_neighbor_table_with(scene, exec)?;
    let per_circle = map_range(pts.len(), exec, |i0| circle_boundary_arcs_full(i0, scene, &table));
    let mut arcs: Vec<LabeledArc> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut arcs_per_circle = Vec::with_capacity(pts.len());
    for res in per_circle {
        let res = res?;
        arcs_per_circle.push(res.arcs.iter().filter(|a| !a.is_point()).count());
        diagnostics.extend(res.diagnostics);
        arcs.extend(res.arcs);
    }
    let hulls = hull_vertex_footholds_with(scene, &table, exec)?;

    let verdict = |p: Point2| is_stable_point_footholds(p, scene);
    let arc_point = |i: usize, u: f64| pts[i] + Point2::from_polar(u) * r;

    // vertices on each labelled segment, as parameters along it
    let mut on_segment: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let project = |i: usize, j: usize, q: Point2| {
        let d = pts[j] - pts[i];
        ((q - pts[i]).dot(d) / d.norm_sq()).clamp(0.0, 1.0)
    };
    let mut loose_points: Vec<Point2> = Vec::new();
    for arc in &arcs {
        if arc.is_full() {
            continue;
        }
        for (end, u) in [(0, arc.lo), (1, arc.hi)] {
            if let Some(EndLabel::Segment(i, j)) = arc.labels[end] {
                on_segment.entry((i, j)).or_default().push(project(i, j, arc_point(arc.i0, u)));
            }
        }
        if arc.is_point() {
            loose_points.push(arc_point(arc.i0, arc.lo));
        }
    }
    for h in &hulls {
        for l in &h.incident_labels {
            if let EndLabel::Segment(i, j) = *l {
                on_segment.entry((i, j)).or_default().push(if h.index == i { 0.0 } else { 1.0 });
            }
        }
        if h.incident_labels.is_empty() {
            loose_points.push(pts[h.index]);
        }
    }

    let mut edges: Vec<BoundaryEdge> = Vec::new();
    let mut isolated_segments = Vec::new();
    let mut isolated_arcs = Vec::new();

    for (&(i, j), ts) in on_segment.iter_mut() {
        let len = pts[i].dist(pts[j]);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b) * len <= EPS_MATCH * r);
        let dir = (pts[j] - pts[i]) * (1.0 / len);
        let normal = dir.perp();
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let m = pts[i].lerp(pts[j], 0.5 * (t0 + t1));
            if !verdict(m).marginal {
                continue;
            }
            let left = verdict(m + normal * eta).stable;
            let right = verdict(m - normal * eta).stable;
            let e = |a, b| BoundaryEdge::Seg { i, j, t0: a, t1: b };
            match (left, right) {
                (true, false) => edges.push(e(t0, t1)),
                (false, true) => edges.push(e(t1, t0)),
                (false, false) => isolated_segments.push(e(t0, t1)),
                (true, true) => diagnostics.push(format!("segment ({i},{j}) gap [{t0}, {t1}] has free space on both sides")),
            }
        }
    }

    for arc in &arcs {
        if arc.is_point() {
            continue;
        }
        let mid = 0.5 * (arc.lo + arc.hi);
        let dirm = Point2::from_polar(mid);
        let inner = verdict(pts[arc.i0] + dirm * (r - eta)).stable;
        let outer = verdict(pts[arc.i0] + dirm * (r + eta)).stable;
        let i = arc.i0;
        match (inner, outer) {
            (true, false) => edges.push(BoundaryEdge::Arc { i, a0: arc.lo, a1: arc.hi }),
            (false, true) => edges.push(BoundaryEdge::Arc { i, a0: arc.hi, a1: arc.lo }),
            (false, false) => isolated_arcs.push(BoundaryEdge::Arc { i, a0: arc.lo, a1: arc.hi }),
            (true, true) => diagnostics.push(format!("arc on C_{i} at {mid} has free space on both sides")),
        }
    }

    let loops = link_loops(&edges, &pts, r)?;

    // isolated points: anything not already a vertex of some edge
    let tol = EPS_MATCH * r;
    let all_edges: Vec<BoundaryEdge> = edges.iter().chain(&isolated_segments).chain(&isolated_arcs).copied().collect();
    let mut isolated_points: Vec<Point2> = Vec::new();
    for q in loose_points {
        let covered = all_edges.iter().any(|e| e.distance(&pts, r, q) <= tol)
            || isolated_points.iter().any(|p| p.dist(q) <= tol);
        if !covered {
            isolated_points.push(q);
        }
    }
    // every foothold is stable; report those not on the boundary or inside a loop
    let partial = FreeSpace {
        reach: r,
        footholds: pts.clone(),
        loops,
        isolated_points,
        isolated_segments,
        isolated_arcs,
        hull_footholds: hulls,
        stats: FreeSpaceStats {
            arrangement: arrangement_stats(&table),
            boundary_edges: 0,
            arcs_per_circle,
        },
        diagnostics,
    };
    let mut fs = partial;
    let extra: Vec<Point2> = pts.iter().copied().filter(|&s| !fs.contains_point(s)).collect();
    fs.isolated_points.extend(extra);
    fs.isolated_points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    fs.stats.boundary_edges = fs.edge_count();
    Ok(fs)
}

/// Link directed edges into closed loops by matching endpoints.
fn link_loops(edges: &[BoundaryEdge], pts: &[Point2], r: f64) -> Result<Vec<Vec<BoundaryEdge>>> {
    let tol = EPS_MATCH * r;
    let mut vertices: Vec<Point2> = Vec::new();
    let mut vertex_of = |q: Point2| -> usize {
        if let Some(k) = vertices.iter().position(|v| v.dist(q) <= tol) {
            return k;
        }
        vertices.push(q);
        vertices.len() - 1
    };
    let ends: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| (vertex_of(e.start(pts, r)), vertex_of(e.end(pts, r))))
        .collect();
    let mut out_edges: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut balance: BTreeMap<usize, i64> = BTreeMap::new();
    for (k, &(a, b)) in ends.iter().enumerate() {
        out_edges.entry(a).or_default().push(k);
        *balance.entry(a).or_default() += 1;
        *balance.entry(b).or_default() -= 1;
    }
    let unmatched: Vec<String> = balance
        .iter()
        .filter(|(_, &b)| b != 0)
        .map(|(&v, b)| format!("{} (balance {b})", vertices[v]))
        .collect();
    if !unmatched.is_empty() {
        return Err(Error::Stitching(format!("unmatched boundary endpoints: {}", unmatched.join(", "))));
    }
    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();
    for first in 0..edges.len() {
        if used[first] {
            continue;
        }
        used[first] = true;
        let start = ends[first].0;
        let mut lp = vec![edges[first]];
        let mut cur = ends[first].1;
        while cur != start {
            let next = out_edges
                .get(&cur)
                .and_then(|v| v.iter().copied().find(|&k| !used[k]))
                .ok_or_else(|| Error::Stitching(format!("open chain at {}", vertices[cur])))?;
            used[next] = true;
            lp.push(edges[next]);
            cur = ends[next].1;
        }
        loops.push(lp);
    }
    Ok(loops)
}
