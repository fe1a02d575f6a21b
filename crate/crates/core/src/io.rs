//! Scene files and JSON output.
//!
//! Scene files keep full precision so that they round-trip exactly. Derived
//! output rounds every float to 12 significant digits so that it is stable
//! across platforms and diff-able.

use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::scene::{Footholds, Scene};
use crate::stability::{Bbox, OccupancyGrid};

/// A float serialized with 12 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn rounded(self) -> f64 {
        round12(self.0)
    }
}

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.rounded())
    }
}

pub fn point_json(p: Point2) -> Value {
    json!([Num(p.x), Num(p.y)])
}

pub fn parse_scene_str(text: &str) -> Result<Scene> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidScene("scene must be a JSON object".into()))?;
    let reach = obj
        .get("R")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidScene("missing numeric \"R\"".into()))?;
    if reach <= 0.0 || !reach.is_finite() {
        return Err(Error::NonPositiveReach);
    }
    match (obj.get("footholds"), obj.get("polygons")) {
        (Some(_), Some(_)) => Err(Error::InvalidScene("both \"footholds\" and \"polygons\" given".into())),
        (None, None) => Err(Error::InvalidScene("one of \"footholds\" or \"polygons\" is required".into())),
        (Some(f), None) => Scene::points(reach, point_list(f, "footholds")?),
        (None, Some(p)) => {
            let polys = p
                .as_array()
                .ok_or_else(|| Error::InvalidScene("\"polygons\" must be an array".into()))?
                .iter()
                .enumerate()
                .map(|(k, poly)| point_list(poly, &format!("polygon {k}")))
                .collect::<Result<Vec<_>>>()?;
            Scene::polygons(reach, polys)
        }
    }
}

fn point_list(v: &Value, what: &str) -> Result<Vec<Point2>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidScene(format!("{what} must be an array of [x, y]")))?;
    arr.iter()
        .map(|p| match p.as_array().map(|a| a.as_slice()) {
            Some([x, y]) => match (x.as_f64(), y.as_f64()) {
                (Some(x), Some(y)) => Ok(Point2::new(x, y)),
                _ => Err(Error::InvalidScene(format!("{what}: coordinates must be numbers"))),
            },
            _ => Err(Error::InvalidScene(format!("{what}: points must be [x, y] pairs"))),
        })
        .collect()
}

pub fn parse_scene(path: &Path) -> Result<Scene> {
    parse_scene_str(&std::fs::read_to_string(path)?)
}

/// Scene file text, full precision.
pub fn serialize_scene(scene: &Scene) -> String {
    let pts = |v: &[Point2]| -> Value { Value::Array(v.iter().map(|p| json!([p.x, p.y])).collect()) };
    let body = match &scene.footholds {
        Footholds::Points(p) => json!({ "R": scene.reach, "footholds": pts(p) }),
        Footholds::Polygons(ps) => json!({
            "R": scene.reach,
            "polygons": Value::Array(ps.iter().map(|p| pts(p)).collect()),
        }),
    };
    serde_json::to_string(&body).expect("plain data serializes")
}

pub fn bbox_json(b: &Bbox) -> Value {
    json!({ "min": point_json(b.min), "max": point_json(b.max) })
}

pub fn grid_json(g: &OccupancyGrid) -> Value {
    json!({
        "bbox": bbox_json(&g.bbox),
        "nx": g.nx,
        "ny": g.ny,
        "bits": g.to_base64(),
    })
}

pub fn grid_from_json(v: &Value) -> Result<OccupancyGrid> {
    let bad = || Error::InvalidScene("malformed grid".into());
    let pt = |v: &Value| -> Result<Point2> {
        match v.as_array().map(|a| a.as_slice()) {
            Some([x, y]) => Ok(Point2::new(x.as_f64().ok_or_else(bad)?, y.as_f64().ok_or_else(bad)?)),
            _ => Err(bad()),
        }
    };
    let bbox = Bbox::new(pt(&v["bbox"]["min"])?, pt(&v["bbox"]["max"])?)?;
    let nx = v["nx"].as_u64().ok_or_else(bad)? as usize;
    let ny = v["ny"].as_u64().ok_or_else(bad)? as usize;
    OccupancyGrid::from_base64(bbox, nx, ny, v["bits"].as_str().ok_or_else(bad)?)
}

/// Pretty JSON text with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}
