//! Upper and lower envelopes of `u`-monotone pieces, the covered strip
//! `Sigma` on one torus, and the labelled arcs of the free-space boundary
//! lying on a circle `C_i0`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::arrangement::NeighborTable;
use crate::error::Result;
use crate::geom::{canonical_angle, AngleInterval, Point2};
use crate::io::Num;
use crate::scene::Scene;
use crate::torus::{build_pieces, EndCause, Omega, PieceSign, TorusPiece};

/// Resolution of breakpoints in `u`.
pub const EPS_U: f64 = 1e-12 * TAU;
/// Slack when comparing envelope values.
const VALUE_TOL: f64 = 1e-9;
/// Tolerance for a difference of envelopes touching zero.
const TOUCH_TOL: f64 = 1e-7;
/// Samples per interval when looking for sign changes.
const SAMPLES: usize = 4;
const BISECTIONS: usize = 100;

/// A function of `u` defined on a closed interval of the real line.
pub trait Curve {
    fn domain(&self) -> (f64, f64);
    fn eval(&self, u: f64) -> f64;
}

/// A curve that belongs to a foothold and may end on a circle crossing.
pub trait Feature: Curve {
    fn foothold(&self) -> usize;
    /// Foothold `i` when the low (`end = 0`) or high (`end = 1`) end of the
    /// domain is a crossing with `C_i`.
    fn vertex_at(&self, end: usize) -> Option<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEntry {
    pub lo: f64,
    pub hi: f64,
    /// Index of the attaining curve in the input slice.
    pub curve: usize,
}

impl ChainEntry {
    pub fn u_interval(&self) -> AngleInterval {
        AngleInterval::from_lifted(self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeChain {
    pub direction: Direction,
    pub entries: Vec<ChainEntry>,
    pub diagnostics: Vec<String>,
}

impl EnvelopeChain {
    fn empty(direction: Direction) -> Self {
        EnvelopeChain {
            direction,
            entries: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Entry whose closed interval contains `u`, preferring the later one at
    /// shared endpoints.
    pub fn entry_at(&self, u: f64) -> Option<&ChainEntry> {
        let k = self.entries.partition_point(|e| e.lo <= u);
        if k > 0 && self.entries[k - 1].hi >= u {
            return Some(&self.entries[k - 1]);
        }
        None
    }

    /// Envelope value at `u`; at an endpoint shared by two entries the more
    /// extreme of both.
    pub fn value<C: Curve>(&self, curves: &[C], u: f64) -> Option<f64> {
        let k = self.entries.partition_point(|e| e.hi < u - EPS_U);
        let mut best: Option<f64> = None;
        for e in &self.entries[k..] {
            if e.lo > u + EPS_U {
                break;
            }
            let v = curves[e.curve].eval(u.clamp(e.lo, e.hi));
            best = Some(match (best, self.direction) {
                (None, _) => v,
                (Some(b), Direction::Upper) => b.max(v),
                (Some(b), Direction::Lower) => b.min(v),
            });
        }
        best
    }
}

/// Pointwise maximum (`Upper`) or minimum (`Lower`) of `curves`.
pub fn envelope<C: Curve>(curves: &[C], direction: Direction) -> EnvelopeChain {
    let idx: Vec<usize> = (0..curves.len()).collect();
    let mut chain = envelope_of(curves, &idx, direction);
    absorb_short(&mut chain);
    chain
}

fn envelope_of<C: Curve>(curves: &[C], idx: &[usize], direction: Direction) -> EnvelopeChain {
    match idx {
        [] => EnvelopeChain::empty(direction),
        [k] => {
            let (lo, hi) = curves[*k].domain();
            let mut c = EnvelopeChain::empty(direction);
            if hi >= lo {
                c.entries.push(ChainEntry { lo, hi, curve: *k });
            }
            c
        }
        _ => {
            let (a, b) = idx.split_at(idx.len() / 2);
            let left = envelope_of(curves, a, direction);
            let right = envelope_of(curves, b, direction);
            merge(curves, &left, &right, direction)
        }
    }
}

fn breakpoints(chains: &[&EnvelopeChain]) -> Vec<f64> {
    let mut xs: Vec<f64> = chains
        .iter()
        .flat_map(|c| c.entries.iter().flat_map(|e| [e.lo, e.hi]))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn merge<C: Curve>(curves: &[C], a: &EnvelopeChain, b: &EnvelopeChain, direction: Direction) -> EnvelopeChain {
    let sgn = match direction {
        Direction::Upper => 1.0,
        Direction::Lower => -1.0,
    };
    let mut out = EnvelopeChain::empty(direction);
    let xs = breakpoints(&[a, b]);
    for w in xs.windows(2) {
        let (x, y) = (w[0], w[1]);
        if y <= x {
            continue;
        }
        let m = 0.5 * (x + y);
        let (ea, eb) = (a.entry_at(m), b.entry_at(m));
        match (ea, eb) {
            (None, None) => {}
            (Some(e), None) | (None, Some(e)) => push_entry(&mut out, x, y, e.curve),
            (Some(ea), Some(eb)) => {
                let (ca, cb) = (ea.curve, eb.curve);
                let g = |u: f64| sgn * (curves[ca].eval(u) - curves[cb].eval(u));
                let roots = sign_changes(&g, x, y);
                let mut lo = x;
                for r in roots.into_iter().chain([y]) {
                    let mid = 0.5 * (lo + r);
                    let winner = if g(mid) >= 0.0 { ca } else { cb };
                    push_entry(&mut out, lo, r, winner);
                    lo = r;
                }
            }
        }
    }
    out.diagnostics.extend(a.diagnostics.iter().cloned());
    out.diagnostics.extend(b.diagnostics.iter().cloned());
    out
}

fn push_entry(chain: &mut EnvelopeChain, lo: f64, hi: f64, curve: usize) {
    if hi <= lo {
        return;
    }
    if let Some(last) = chain.entries.last_mut() {
        if last.curve == curve && last.hi == lo {
            last.hi = hi;
            return;
        }
    }
    chain.entries.push(ChainEntry { lo, hi, curve });
}

/// Entries narrower than `EPS_U` are below the resolution of the `u`-axis
/// and are merged into a neighbour.
fn absorb_short(chain: &mut EnvelopeChain) {
    let mut out: Vec<ChainEntry> = Vec::with_capacity(chain.entries.len());
    let n = chain.entries.len();
    for k in 0..n {
        let e = chain.entries[k];
        if e.hi - e.lo >= EPS_U {
            match out.last_mut() {
                Some(last) if last.curve == e.curve && (e.lo - last.hi).abs() <= EPS_U => last.hi = e.hi,
                _ => out.push(e),
            }
            continue;
        }
        let touches_prev = out.last().is_some_and(|l| (e.lo - l.hi).abs() <= EPS_U);
        let touches_next = chain.entries.get(k + 1).is_some_and(|nx| (nx.lo - e.hi).abs() <= EPS_U);
        if touches_prev {
            out.last_mut().expect("checked").hi = e.hi;
        } else if touches_next {
            chain.entries[k + 1].lo = e.lo;
        } else {
            // an isolated sliver column; keep it
            out.push(e);
        }
    }
    chain.entries = out;
}

/// Roots of `g` on `[x, y]` located by sampling and bisection.
fn sign_changes(g: &dyn Fn(f64) -> f64, x: f64, y: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_u = x;
    let mut prev = g(x);
    for s in 1..=SAMPLES {
        let u = x + (y - x) * s as f64 / SAMPLES as f64;
        let v = g(u);
        if (prev < 0.0 && v > 0.0) || (prev > 0.0 && v < 0.0) {
            let r = bisect(g, prev_u, u, prev);
            if r > x && r < y {
                roots.push(r);
            }
        }
        if v != 0.0 {
            prev = v;
            prev_u = u;
        }
    }
    roots
}

fn bisect(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let neg = ga < 0.0;
    for _ in 0..BISECTIONS {
        if b - a <= EPS_U * 0.5 {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Feature responsible for an endpoint of the boundary on `C_i0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EndLabel {
    /// The boundary continues along circle `C_i`.
    Circle(usize),
    /// The boundary continues along segment `[s_i, s_j]`, `i < j`.
    Segment(usize, usize),
}

impl EndLabel {
    pub fn segment(i: usize, j: usize) -> EndLabel {
        EndLabel::Segment(i.min(j), i.max(j))
    }
}

/// A lifted `u`-interval of the covered strip.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverArc {
    pub lo: f64,
    pub hi: f64,
    pub labels: [Option<EndLabel>; 2],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coverage {
    /// The whole circle is covered.
    pub full: bool,
    /// Disjoint covered intervals on the lifted domain (ignored when `full`).
    pub arcs: Vec<CoverArc>,
    pub diagnostics: Vec<String>,
}

/// The four envelope chains of one torus.
pub struct Chains<'a> {
    pub omega1_upper: &'a EnvelopeChain,
    pub omega1_lower: &'a EnvelopeChain,
    pub omega2_upper: &'a EnvelopeChain,
    pub omega2_lower: &'a EnvelopeChain,
}

#[derive(Debug, Clone, Copy)]
struct Cause {
    /// Which difference (0: `U2 - L1`, 1: `U1 - L2 - 2pi`) has a root here,
    /// and the footholds of the two curves realising it.
    root: Option<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    f: [Option<f64>; 2],
}

impl Eval {
    fn covered(&self) -> bool {
        matches!(self.f, [Some(a), Some(b)] if a >= -VALUE_TOL && b >= -VALUE_TOL)
    }
}

fn eval_at<C: Curve>(curves: &[C], ch: &Chains, u: f64) -> Eval {
    let u1 = ch.omega1_upper.value(curves, u);
    let l1 = ch.omega1_lower.value(curves, u);
    let u2 = ch.omega2_upper.value(curves, u);
    let l2 = ch.omega2_lower.value(curves, u);
    let defined = u1.is_some() && l1.is_some() && u2.is_some() && l2.is_some();
    if !defined {
        return Eval { f: [None, None] };
    }
    let (u1, l1, u2, l2) = (u1.unwrap(), l1.unwrap(), u2.unwrap(), l2.unwrap());
    Eval {
        f: [Some(u2 - l1), Some(u1 - l2 - TAU)],
    }
}

/// Set of `u` in `[dom_lo, dom_lo + 2pi]` where the two regions together
/// cover the whole `theta`-circle.
pub fn coverage_intervals<C: Feature>(curves: &[C], chains: &Chains, dom_lo: f64) -> Coverage {
    let dom_hi = dom_lo + TAU;
    let all = [chains.omega1_upper, chains.omega1_lower, chains.omega2_upper, chains.omega2_lower];
    let mut points: Vec<(f64, Cause)> = vec![(dom_lo, Cause { root: None }), (dom_hi, Cause { root: None })];
    for x in breakpoints(&all) {
        points.push((x.clamp(dom_lo, dom_hi), Cause { root: None }));
    }
    let xs = breakpoints(&all);
    let mut grid: Vec<f64> = [dom_lo, dom_hi].into_iter().chain(xs).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    for w in grid.windows(2) {
        let (x, y) = (w[0], w[1]);
        if y - x <= 0.0 {
            continue;
        }
        let m = 0.5 * (x + y);
        let get = |c: &EnvelopeChain| c.entry_at(m).map(|e| e.curve);
        let (Some(a1), Some(b1), Some(a2), Some(b2)) = (
            get(chains.omega1_upper),
            get(chains.omega1_lower),
            get(chains.omega2_upper),
            get(chains.omega2_lower),
        ) else {
            continue;
        };
        let pairs = [(a2, b1, 0.0), (a1, b2, TAU)];
        for (which, &(hi_c, lo_c, shift)) in pairs.iter().enumerate() {
            let g = |u: f64| curves[hi_c].eval(u) - curves[lo_c].eval(u) - shift;
            for r in sign_changes(&g, x, y) {
                let cause = (which, curves[hi_c].foothold(), curves[lo_c].foothold());
                points.push((r, Cause { root: Some(cause) }));
            }
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    // cluster candidates closer than EPS_U
    let mut clusters: Vec<(f64, Vec<Cause>)> = Vec::new();
    for (u, c) in points {
        match clusters.last_mut() {
            Some((v, cs)) if u - *v <= EPS_U => cs.push(c),
            _ => clusters.push((u, vec![c])),
        }
    }
    if let Some(last) = clusters.last_mut() {
        last.0 = dom_hi;
    }
    clusters[0].0 = dom_lo;

    let n = clusters.len();
    let point_eval: Vec<Eval> = clusters.iter().map(|(u, _)| eval_at(curves, chains, *u)).collect();
    let gap_eval: Vec<Eval> = clusters
        .windows(2)
        .map(|w| eval_at(curves, chains, 0.5 * (w[0].0 + w[1].0)))
        .collect();

    let mut diagnostics = Vec::new();
    let mut label = |k: usize, outside: Option<&Eval>| -> Option<EndLabel> {
        let (u, causes) = &clusters[k];
        endpoint_label(curves, chains, *u, causes, outside).or_else(|| {
            diagnostics.push(format!("unexplained coverage endpoint at u = {u}"));
            None
        })
    };

    // walk the alternating sequence point, gap, point, ... and collect runs
    let mut arcs: Vec<CoverArc> = Vec::new();
    let mut k = 0;
    while k < n {
        let start_ok = point_eval[k].covered() || (k < n - 1 && gap_eval[k].covered());
        if !start_ok {
            k += 1;
            continue;
        }
        let start = k;
        let mut end = k;
        while end < n - 1 && gap_eval[end].covered() {
            end += 1;
        }
        let before = if start > 0 { Some(&gap_eval[start - 1]) } else { None };
        let after = if end < n - 1 { Some(&gap_eval[end]) } else { None };
        let lo_label = if start == 0 { None } else { label(start, before) };
        let hi_label = if end == n - 1 { None } else { label(end, after) };
        arcs.push(CoverArc {
            lo: clusters[start].0,
            hi: clusters[end].0,
            labels: [lo_label, hi_label],
        });
        k = end + 1;
    }

    let mut full = false;
    if arcs.len() == 1 && arcs[0].lo == dom_lo && arcs[0].hi == dom_hi {
        full = true;
        arcs.clear();
    } else if arcs.len() >= 2 && arcs[0].lo == dom_lo && arcs[arcs.len() - 1].hi == dom_hi {
        let first = arcs.remove(0);
        let last = arcs.last_mut().expect("at least one left");
        last.hi = first.hi + TAU;
        last.labels[1] = first.labels[1];
    }
    Coverage { full, arcs, diagnostics }
}

fn endpoint_label<C: Feature>(
    curves: &[C],
    chains: &Chains,
    u: f64,
    causes: &[Cause],
    outside: Option<&Eval>,
) -> Option<EndLabel> {
    // which constraint fails just outside the covered set
    let failing: Vec<usize> = match outside.map(|e| e.f) {
        Some([Some(a), Some(b)]) => [(0, a), (1, b)]
            .into_iter()
            .filter(|&(_, v)| v < -VALUE_TOL)
            .map(|(w, _)| w)
            .collect(),
        _ => Vec::new(),
    };
    for &w in &failing {
        if let Some(&(_, a, b)) = causes.iter().filter_map(|c| c.root.as_ref()).find(|r| r.0 == w) {
            return Some(EndLabel::segment(a, b));
        }
    }
    // a difference touching zero without crossing it
    let touching = |w: usize| -> Option<EndLabel> {
        let (hi, lo, shift) = if w == 0 {
            (chains.omega2_upper, chains.omega1_lower, 0.0)
        } else {
            (chains.omega1_upper, chains.omega2_lower, TAU)
        };
        let (a, b) = (hi.entry_at(u)?.curve, lo.entry_at(u)?.curve);
        let f = hi.value(curves, u)? - lo.value(curves, u)? - shift;
        let (fa, fb) = (curves[a].foothold(), curves[b].foothold());
        (f.abs() <= TOUCH_TOL && fa != fb).then(|| EndLabel::segment(fa, fb))
    };
    if let Some(l) = failing.iter().find_map(|&w| touching(w)) {
        return Some(l);
    }
    // a region ends on a crossing of circles
    let mut vertex = None;
    for c in curves {
        let (lo, hi) = c.domain();
        for (end, x) in [(0, lo), (1, hi)] {
            if (x - u).abs() <= 4.0 * EPS_U || (x - u - TAU).abs() <= 4.0 * EPS_U || (x - u + TAU).abs() <= 4.0 * EPS_U {
                if let Some(i) = c.vertex_at(end) {
                    vertex = Some(i);
                }
            }
        }
    }
    if failing.is_empty() {
        if let Some(i) = vertex {
            return Some(EndLabel::Circle(i));
        }
    }
    // a root without a sign change in the samples
    if let Some(&(_, a, b)) = causes.iter().filter_map(|c| c.root.as_ref()).next() {
        return Some(EndLabel::segment(a, b));
    }
    vertex.map(EndLabel::Circle).or_else(|| touching(0)).or_else(|| touching(1))
}

/// A torus piece restricted to one lift of the `u`-axis.
#[derive(Debug, Clone)]
pub struct CutPiece<'a> {
    pub piece: &'a TorusPiece,
    pub lo: f64,
    pub hi: f64,
    pub vertex: [Option<usize>; 2],
}

impl Curve for CutPiece<'_> {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn eval(&self, u: f64) -> f64 {
        self.piece.eval(u)
    }
}

impl Feature for CutPiece<'_> {
    fn foothold(&self) -> usize {
        self.piece.i
    }

    fn vertex_at(&self, end: usize) -> Option<usize> {
        self.vertex[end]
    }
}

fn vertex_of(c: EndCause) -> Option<usize> {
    match c {
        EndCause::Vertex(i) => Some(i),
        EndCause::Split => None,
    }
}

/// Midpoint of the largest gap between piece endpoints, as a cut for the
/// `u`-circle.
pub fn choose_cut(pieces: &[TorusPiece]) -> f64 {
    let mut ends: Vec<f64> = pieces
        .iter()
        .flat_map(|p| [canonical_angle(p.u_lo), canonical_angle(p.u_hi)])
        .collect();
    if ends.is_empty() {
        return 0.0;
    }
    ends.sort_by(f64::total_cmp);
    let mut best = (ends[0] + TAU - ends[ends.len() - 1], ends[ends.len() - 1]);
    for w in ends.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    canonical_angle(best.1 + 0.5 * best.0)
}

/// Restrict pieces to `[cut, cut + 2pi]`, splitting those that wrap.
pub fn cut_pieces(pieces: &[TorusPiece], cut: f64) -> Vec<CutPiece<'_>> {
    let mut out = Vec::new();
    for p in pieces {
        let ext = p.u_hi - p.u_lo;
        let lo = cut + canonical_angle(p.u_lo - cut);
        let hi = lo + ext;
        let v = [vertex_of(p.causes[0]), vertex_of(p.causes[1])];
        if hi <= cut + TAU {
            out.push(CutPiece { piece: p, lo, hi, vertex: v });
        } else {
            out.push(CutPiece { piece: p, lo, hi: cut + TAU, vertex: [v[0], None] });
            if hi - TAU - cut > EPS_U {
                out.push(CutPiece { piece: p, lo: cut, hi: hi - TAU, vertex: [None, v[1]] });
            }
        }
    }
    out
}

/// Envelope chains of the cut pieces, by class and sign.
pub struct TorusEnvelopes {
    pub omega1_upper: EnvelopeChain,
    pub omega1_lower: EnvelopeChain,
    pub omega2_upper: EnvelopeChain,
    pub omega2_lower: EnvelopeChain,
}

impl TorusEnvelopes {
    pub fn chains(&self) -> Chains<'_> {
        Chains {
            omega1_upper: &self.omega1_upper,
            omega1_lower: &self.omega1_lower,
            omega2_upper: &self.omega2_upper,
            omega2_lower: &self.omega2_lower,
        }
    }
}

pub fn torus_envelopes(cut: &[CutPiece]) -> TorusEnvelopes {
    let chain = |omega: Omega, sign: PieceSign, dir: Direction| {
        // envelope over a subset, with entries mapped back to `cut` indices
        let idx: Vec<usize> = (0..cut.len())
            .filter(|&k| cut[k].piece.omega == omega && cut[k].piece.sign == sign)
            .collect();
        let sub: Vec<&CutPiece> = idx.iter().map(|&k| &cut[k]).collect();
        let mut ch = envelope(&sub, dir);
        for e in &mut ch.entries {
            e.curve = idx[e.curve];
        }
        ch
    };
    TorusEnvelopes {
        omega1_upper: chain(Omega::One, PieceSign::Plus, Direction::Upper),
        omega1_lower: chain(Omega::One, PieceSign::Minus, Direction::Lower),
        omega2_upper: chain(Omega::Two, PieceSign::Plus, Direction::Upper),
        omega2_lower: chain(Omega::Two, PieceSign::Minus, Direction::Lower),
    }
}

impl<T: Curve + ?Sized> Curve for &T {
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }

    fn eval(&self, u: f64) -> f64 {
        (**self).eval(u)
    }
}

/// Covered strip of one torus computed from `pieces` on `[cut, cut + 2pi]`.
pub fn torus_coverage(pieces: &[TorusPiece], cut: f64) -> Coverage {
    let cp = cut_pieces(pieces, cut);
    let env = torus_envelopes(&cp);
    let mut cov = coverage_intervals(&cp, &env.chains(), cut);
    for ch in [&env.omega1_upper, &env.omega1_lower, &env.omega2_upper, &env.omega2_lower] {
        cov.diagnostics.extend(ch.diagnostics.iter().cloned());
    }
    cov
}

/// Part of the free-space boundary on `C_i0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledArc {
    pub i0: usize,
    /// Lifted angles on `C_i0`, `lo <= hi`; equal for an isolated point.
    pub lo: f64,
    pub hi: f64,
    /// `None` only for a full circle.
    pub labels: [Option<EndLabel>; 2],
}

impl LabeledArc {
    pub fn arc(&self) -> AngleInterval {
        AngleInterval::from_lifted(self.lo, self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.hi - self.lo <= EPS_U
    }

    pub fn is_full(&self) -> bool {
        self.hi - self.lo >= TAU
    }

    pub fn point_at(&self, center: Point2, reach: f64, u: f64) -> Point2 {
        center + Point2::from_polar(u) * reach
    }
}

/// Boundary arcs on `C_i0` and diagnostics from their computation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircleArcs {
    pub arcs: Vec<LabeledArc>,
    pub sigma: Coverage,
    pub sigma_prime: Coverage,
    pub diagnostics: Vec<String>,
}

pub fn circle_boundary_arcs(i0: usize, scene: &Scene, table: &NeighborTable) -> Result<Vec<LabeledArc>> {
    Ok(circle_boundary_arcs_full(i0, scene, table)?.arcs)
}

/// `closure(Sigma) \ interior(Sigma')` on `C_i0`, where `Sigma` is the set of
/// stable placements on the circle and `Sigma'` those that stay stable
/// without `s_i0`.
pub fn circle_boundary_arcs_full(i0: usize, scene: &Scene, table: &NeighborTable) -> Result<CircleArcs> {
    let pieces = build_pieces(i0, scene, table)?;
    let cut = choose_cut(&pieces);
    let sigma = torus_coverage(&pieces, cut);
    let others: Vec<TorusPiece> = pieces.iter().filter(|p| !p.is_own()).cloned().collect();
    let sigma_prime = torus_coverage(&others, cut);
    let mut diagnostics = sigma.diagnostics.clone();
    diagnostics.extend(sigma_prime.diagnostics.iter().cloned());
    let arcs = subtract(i0, &sigma, &sigma_prime, cut);
    Ok(CircleArcs {
        arcs,
        sigma,
        sigma_prime,
        diagnostics,
    })
}

fn subtract(i0: usize, sigma: &Coverage, prime: &Coverage, cut: f64) -> Vec<LabeledArc> {
    let mut out = Vec::new();
    if sigma.full {
        if prime.full {
            return out;
        }
        if prime.arcs.is_empty() {
            out.push(LabeledArc {
                i0,
                lo: cut,
                hi: cut + TAU,
                labels: [None, None],
            });
            return out;
        }
        // complement of the interiors of Sigma' around the circle
        let arcs = &prime.arcs;
        for k in 0..arcs.len() {
            let a = &arcs[k];
            let (b, shift) = if k + 1 < arcs.len() { (&arcs[k + 1], 0.0) } else { (&arcs[0], TAU) };
            out.push(LabeledArc {
                i0,
                lo: a.hi,
                hi: (b.lo + shift).max(a.hi),
                labels: [a.labels[1], b.labels[0]],
            });
        }
        return out;
    }
    for s in &sigma.arcs {
        let mut holes: Vec<(f64, f64, [Option<EndLabel>; 2])> = Vec::new();
        let prime_arcs: Vec<CoverArc> = if prime.full {
            vec![CoverArc {
                lo: s.lo - TAU,
                hi: s.hi + TAU,
                labels: [None, None],
            }]
        } else {
            prime.arcs.clone()
        };
        for p in &prime_arcs {
            for shift in [-TAU, 0.0, TAU] {
                let (lo, hi) = (p.lo + shift, p.hi + shift);
                if hi < s.lo - EPS_U || lo > s.hi + EPS_U {
                    continue;
                }
                holes.push((lo, hi, p.labels));
            }
        }
        holes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cursor = s.lo;
        let mut cur_label = s.labels[0];
        for (lo, hi, labels) in holes {
            if hi <= cursor {
                continue;
            }
            if lo > cursor + EPS_U {
                out.push(LabeledArc {
                    i0,
                    lo: cursor,
                    hi: lo.min(s.hi),
                    labels: [cur_label, if lo >= s.hi { s.labels[1] } else { labels[0] }],
                });
            } else if lo >= cursor - EPS_U && cursor == s.lo {
                // a hole starting at the end of Sigma leaves the endpoint itself
                out.push(LabeledArc {
                    i0,
                    lo: cursor,
                    hi: cursor,
                    labels: [cur_label, cur_label],
                });
            }
            if hi >= s.hi - EPS_U {
                cursor = f64::INFINITY;
                if s.hi >= lo {
                    out.push(LabeledArc {
                        i0,
                        lo: s.hi,
                        hi: s.hi,
                        labels: [s.labels[1], s.labels[1]],
                    });
                }
                break;
            }
            cursor = hi;
            cur_label = labels[1];
        }
        if cursor.is_finite() {
            out.push(LabeledArc {
                i0,
                lo: cursor,
                hi: s.hi.max(cursor),
                labels: [cur_label, s.labels[1]],
            });
        }
    }
    out
}

#[derive(Serialize)]
struct ChainDump {
    direction: Direction,
    entries: Vec<(Num, Num, usize, usize)>,
}

/// Debug view of the chains and strips of one torus.
pub fn torus_debug_json(i0: usize, scene: &Scene, table: &NeighborTable) -> Result<serde_json::Value> {
    let pieces = build_pieces(i0, scene, table)?;
    let cut = choose_cut(&pieces);
    let cp = cut_pieces(&pieces, cut);
    let env = torus_envelopes(&cp);
    let dump = |c: &EnvelopeChain| ChainDump {
        direction: c.direction,
        entries: c
            .entries
            .iter()
            .map(|e| (Num(e.lo), Num(e.hi), cp[e.curve].piece.i, cp[e.curve].piece.k))
            .collect(),
    };
    let full = circle_boundary_arcs_full(i0, scene, table)?;
    let strip = |c: &Coverage| -> serde_json::Value {
        if c.full {
            serde_json::json!("full")
        } else {
            serde_json::to_value(c.arcs.iter().map(|a| (Num(a.lo), Num(a.hi))).collect::<Vec<_>>())
                .expect("plain data")
        }
    };
    Ok(serde_json::json!({
        "i0": i0,
        "cut": Num(cut),
        "omega1_upper": dump(&env.omega1_upper),
        "omega1_lower": dump(&env.omega1_lower),
        "omega2_upper": dump(&env.omega2_upper),
        "omega2_lower": dump(&env.omega2_lower),
        "sigma": strip(&full.sigma),
        "sigma_prime": strip(&full.sigma_prime),
    }))
}

/// Convenience for tests and diagnostics: is `u` within the lifted arc.
pub fn arc_contains(arc: &LabeledArc, u: f64, eps: f64) -> bool {
    if arc.is_full() {
        return true;
    }
    let off = canonical_angle(u - arc.lo);
    off <= arc.hi - arc.lo + eps || off >= TAU - eps
}
