//! SVG output. The y-axis points up in the drawing, so every point is
//! written as `(x, -y)`.

use std::f64::consts::PI;
use std::fmt::Write;

use crate::freespace::{BoundaryEdge, FreeSpace};
use crate::geom::Point2;
use crate::io::round12;
use crate::polygonal::Tracings;
use crate::scene::{Footholds, Scene};
use crate::stability::{Bbox, OccupancyGrid};

const DARK: &str = "#222222";
const LIGHT: &str = "#9fd3a8";
const GRID: &str = "#cfe8d3";
const CIRCLE: &str = "#8899aa";
const CURVE: &str = "#c05030";
const RELEVANT: &str = "#2060c0";

/// Everything that can be drawn; `scene` is always drawn.
pub struct Drawing<'a> {
    pub scene: &'a Scene,
    pub bbox: Bbox,
    pub freespace: Option<&'a FreeSpace>,
    pub grid: Option<&'a OccupancyGrid>,
    pub curves: Option<&'a Tracings>,
    /// Draw the circles `C_i` of radius `R` around point footholds.
    pub circles: bool,
}

fn n(x: f64) -> String {
    format!("{}", round12(x))
}

fn xy(p: Point2) -> String {
    format!("{} {}", n(p.x), n(-p.y))
}

pub fn render_svg(d: &Drawing) -> String {
    let b = d.bbox;
    let size = b.width().max(b.height());
    let stroke = size / 500.0;
    let marker = size / 150.0;
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}" width="800" height="{}">"#,
        n(b.min.x),
        n(-b.max.y),
        n(b.width()),
        n(b.height()),
        n((800.0 * b.height() / b.width()).round())
    )
    .unwrap();
    writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, n(b.min.x), n(-b.max.y), n(b.width()), n(b.height())).unwrap();

    if let Some(g) = d.grid {
        grid_paths(&mut s, g);
    }
    if let Some(fs) = d.freespace {
        freespace_paths(&mut s, fs, stroke, marker);
    }
    if d.circles {
        if let Some(pts) = d.scene.point_footholds() {
            for p in pts {
                writeln!(
                    s,
                    r#"<circle class="reach" cx="{}" cy="{}" r="{}" fill="none" stroke="{CIRCLE}" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
                    n(p.x),
                    n(-p.y),
                    n(d.scene.reach),
                    n(stroke * 0.5),
                    n(stroke * 4.0),
                    n(stroke * 4.0)
                )
                .unwrap();
            }
        }
    }
    if let Some(tr) = d.curves {
        curve_paths(&mut s, tr, stroke);
    }
    match &d.scene.footholds {
        Footholds::Points(pts) => {
            for p in pts {
                writeln!(s, r#"<circle class="foothold" cx="{}" cy="{}" r="{}" fill="{DARK}"/>"#, n(p.x), n(-p.y), n(marker)).unwrap();
            }
        }
        Footholds::Polygons(polys) => {
            for poly in polys {
                let pts: Vec<String> = poly.iter().map(|p| xy(*p)).collect();
                writeln!(
                    s,
                    r#"<path class="polygon" d="M {} Z" fill="{DARK}" stroke="{DARK}" stroke-width="{}"/>"#,
                    pts.join(" L "),
                    n(stroke)
                )
                .unwrap();
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn grid_paths(s: &mut String, g: &OccupancyGrid) {
    let (cw, ch) = (g.bbox.width() / g.nx as f64, g.bbox.height() / g.ny as f64);
    for j in 0..g.ny {
        let mut d = String::new();
        let mut i = 0;
        while i < g.nx {
            if !g.get(i, j) {
                i += 1;
                continue;
            }
            let start = i;
            while i < g.nx && g.get(i, j) {
                i += 1;
            }
            let x0 = g.bbox.min.x + cw * start as f64;
            let y1 = g.bbox.min.y + ch * (j + 1) as f64;
            write!(d, "M {} {} h {} v {} h {} Z ", n(x0), n(-y1), n(cw * (i - start) as f64), n(ch), n(-cw * (i - start) as f64)).unwrap();
        }
        if !d.is_empty() {
            writeln!(s, r#"<path class="grid-row" d="{}" fill="{GRID}"/>"#, d.trim_end()).unwrap();
        }
    }
}

/// Path commands continuing from the start of `e` to its end.
fn edge_commands(e: &BoundaryEdge, fs: &FreeSpace) -> String {
    let (pts, r) = (&fs.footholds, fs.reach);
    match *e {
        BoundaryEdge::Seg { .. } => format!("L {}", xy(e.end(pts, r))),
        BoundaryEdge::Arc { a0, a1, .. } => {
            // split so that no piece exceeds a half turn
            let pieces = ((a1 - a0).abs() / (PI * 0.99)).ceil().max(1.0) as usize;
            let sweep = if a1 > a0 { 0 } else { 1 };
            (1..=pieces)
                .map(|k| {
                    let p = e.point_at(pts, r, k as f64 / pieces as f64);
                    format!("A {} {} 0 0 {} {}", n(r), n(r), sweep, xy(p))
                })
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

fn edge_class(e: &BoundaryEdge) -> &'static str {
    match e {
        BoundaryEdge::Arc { .. } => "edge arc",
        BoundaryEdge::Seg { .. } => "edge seg",
    }
}

fn freespace_paths(s: &mut String, fs: &FreeSpace, stroke: f64, marker: f64) {
    let (pts, r) = (&fs.footholds, fs.reach);
    for lp in &fs.loops {
        let Some(first) = lp.first() else { continue };
        let mut d = format!("M {}", xy(first.start(pts, r)));
        for e in lp {
            d.push(' ');
            d.push_str(&edge_commands(e, fs));
        }
        writeln!(s, r#"<path class="loop" d="{d} Z" fill="{LIGHT}" fill-rule="evenodd" stroke="none"/>"#).unwrap();
    }
    for e in fs.edges() {
        writeln!(
            s,
            r#"<path class="{}" d="M {} {}" fill="none" stroke="{DARK}" stroke-width="{}"/>"#,
            edge_class(e),
            xy(e.start(pts, r)),
            edge_commands(e, fs),
            n(stroke)
        )
        .unwrap();
    }
    for p in &fs.isolated_points {
        writeln!(
            s,
            r#"<circle class="isolated" cx="{}" cy="{}" r="{}" fill="{LIGHT}" stroke="{DARK}" stroke-width="{}"/>"#,
            n(p.x),
            n(-p.y),
            n(marker * 1.8),
            n(stroke * 0.5)
        )
        .unwrap();
    }
}

fn curve_paths(s: &mut String, tr: &Tracings, stroke: f64) {
    const STEPS: usize = 64;
    for c in &tr.curves {
        let poly = |lo: f64, hi: f64| -> Option<String> {
            let pts: Vec<String> = (0..=STEPS)
                .filter_map(|k| c.placement(&tr.walls, &tr.corners, tr.reach, lo + (hi - lo) * k as f64 / STEPS as f64))
                .map(|lp| xy(lp.midpoint))
                .collect();
            (pts.len() >= 2).then(|| format!("M {}", pts.join(" L ")))
        };
        for &(lo, hi) in &c.domain {
            if let Some(d) = poly(lo, hi) {
                writeln!(
                    s,
                    r#"<path class="curve {}" d="{d}" fill="none" stroke="{CURVE}" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
                    c.kind.name(),
                    n(stroke * 0.7),
                    n(stroke * 3.0),
                    n(stroke * 3.0)
                )
                .unwrap();
            }
        }
        for &(lo, hi) in &c.relevant {
            if let Some(d) = poly(lo, hi) {
                writeln!(
                    s,
                    r#"<path class="curve relevant {}" d="{d}" fill="none" stroke="{RELEVANT}" stroke-width="{}"/>"#,
                    c.kind.name(),
                    n(stroke)
                )
                .unwrap();
            }
        }
    }
}
