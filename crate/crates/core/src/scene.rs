//! Problem input: leg length plus either point footholds or polygonal
//! foothold regions.

use crate::error::{Error, Result};
use crate::geom::{Point2, DEFAULT_EPS};

#[derive(Debug, Clone, PartialEq)]
pub enum Footholds {
    Points(Vec<Point2>),
    /// Vertex lists of pairwise disjoint simple polygons, closed implicitly.
    /// Two-vertex "polygons" (bare segments) are accepted by the predicates
    /// but rejected by contact-curve generation.
    Polygons(Vec<Vec<Point2>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Maximal leg extension `R`.
    pub reach: f64,
    pub footholds: Footholds,
    /// Relative tolerance; absolute lengths use `eps * reach`.
    pub eps: f64,
}

impl Scene {
    pub fn points(reach: f64, points: Vec<Point2>) -> Result<Scene> {
        check_reach(reach)?;
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidScene(format!("foothold {i} is not finite")));
            }
        }
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidScene("duplicate footholds".into()));
        }
        Ok(Scene {
            reach,
            footholds: Footholds::Points(points),
            eps: DEFAULT_EPS,
        })
    }

    pub fn polygons(reach: f64, polygons: Vec<Vec<Point2>>) -> Result<Scene> {
        check_reach(reach)?;
        for (k, poly) in polygons.iter().enumerate() {
            if poly.len() < 2 {
                return Err(Error::InvalidScene(format!("polygon {k} needs at least two vertices")));
            }
            if poly.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidScene(format!("polygon {k} has a non-finite vertex")));
            }
        }
        let scene = Scene {
            reach,
            footholds: Footholds::Polygons(polygons),
            eps: DEFAULT_EPS,
        };
        if let Some((a, b)) = crate::polygonal::first_crossing(&crate::polygonal::walls(&scene)) {
            return Err(Error::InvalidScene(format!("walls {a} and {b} cross")));
        }
        Ok(scene)
    }

    pub fn with_eps(mut self, eps: f64) -> Scene {
        self.eps = eps;
        self
    }

    /// Absolute length tolerance.
    pub fn tol(&self) -> f64 {
        self.eps * self.reach
    }

    pub fn point_footholds(&self) -> Option<&[Point2]> {
        match &self.footholds {
            Footholds::Points(p) => Some(p),
            Footholds::Polygons(_) => None,
        }
    }

    pub fn polygon_list(&self) -> Option<&[Vec<Point2>]> {
        match &self.footholds {
            Footholds::Polygons(p) => Some(p),
            Footholds::Points(_) => None,
        }
    }

    pub(crate) fn require_points(&self) -> Result<&[Point2]> {
        self.point_footholds()
            .ok_or(Error::SceneKind { expected: "point-foothold" })
    }

    pub(crate) fn require_polygons(&self) -> Result<&[Vec<Point2>]> {
        self.polygon_list()
            .ok_or(Error::SceneKind { expected: "polygonal" })
    }

    /// Axis-aligned bounds of all foothold geometry.
    pub fn bounds(&self) -> Option<(Point2, Point2)> {
        let pts: Vec<Point2> = match &self.footholds {
            Footholds::Points(p) => p.clone(),
            Footholds::Polygons(p) => p.iter().flatten().copied().collect(),
        };
        let first = *pts.first()?;
        Some(pts.iter().fold((first, first), |(lo, hi), q| {
            (
                Point2::new(lo.x.min(q.x), lo.y.min(q.y)),
                Point2::new(hi.x.max(q.x), hi.y.max(q.y)),
            )
        }))
    }
}

fn check_reach(reach: f64) -> Result<()> {
    if reach > 0.0 && reach.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveReach)
    }
}
