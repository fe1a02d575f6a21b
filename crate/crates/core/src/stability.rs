//! Direct stability predicates and a grid-sampling free-space approximator.
//!
//! A placement `P` is stable iff no closed half-disk of radius `R` centred
//! at `P` is free of footholds, i.e. iff `P` lies in the convex hull of the
//! footholds within reach. These predicates never look at the exact
//! boundary machinery and serve as its ground truth.

use std::f64::consts::{PI, TAU};

use base64::Engine;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::par::{map_range, Execution};
use crate::scene::{Footholds, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// On the boundary of the free space, within tolerance. Implies `stable`.
    pub marginal: bool,
}

impl StabilityVerdict {
    pub const UNSTABLE: StabilityVerdict = StabilityVerdict {
        stable: false,
        marginal: false,
    };
    pub const INTERIOR: StabilityVerdict = StabilityVerdict {
        stable: true,
        marginal: false,
    };
    pub const MARGINAL: StabilityVerdict = StabilityVerdict {
        stable: true,
        marginal: true,
    };
}

/// Footholds within the closed disk of radius `R` around `p`.
pub fn reachable_footholds(p: Point2, scene: &Scene) -> Vec<Point2> {
    let Some(pts) = scene.point_footholds() else {
        return Vec::new();
    };
    let limit = scene.reach + scene.tol();
    pts.iter().copied().filter(|s| s.dist(p) <= limit).collect()
}

/// Largest angular gap between consecutive directions from `p` to `points`.
/// `2pi` for an empty list (and for a single point).
pub fn max_angular_gap(p: Point2, points: &[Point2]) -> f64 {
    let mut dirs: Vec<f64> = points.iter().map(|q| (*q - p).polar()).collect();
    max_gap_of_directions(&mut dirs)
}

pub(crate) fn max_gap_of_directions(dirs: &mut [f64]) -> f64 {
    if dirs.is_empty() {
        return TAU;
    }
    dirs.sort_by(f64::total_cmp);
    let wrap = dirs[0] + TAU - dirs[dirs.len() - 1];
    dirs.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// Stability of `p` over point footholds.
///
/// Marginal placements are those at the limit of stability (largest gap
/// equal to `pi`) and those at the limit of accessibility: stable, but
/// unstable or marginal once footholds at distance exactly `R` are dropped.
pub fn is_stable_point_footholds(p: Point2, scene: &Scene) -> StabilityVerdict {
    let Some(pts) = scene.point_footholds() else {
        return StabilityVerdict::UNSTABLE;
    };
    let tol = scene.tol();
    let eps = scene.eps;
    let outer = scene.reach + tol;
    let inner = scene.reach - tol;

    let mut coincident = false;
    let mut all_dirs = Vec::new();
    let mut inner_dirs = Vec::new();
    for s in pts {
        let d = s.dist(p);
        if d > outer {
            continue;
        }
        if d <= tol {
            coincident = true;
            continue;
        }
        let dir = (*s - p).polar();
        all_dirs.push(dir);
        if d < inner {
            inner_dirs.push(dir);
        }
    }
    let touching_rim = all_dirs.len() != inner_dirs.len();
    let gap = max_gap_of_directions(&mut all_dirs);

    if coincident {
        // P is itself a foothold; it is on the boundary iff the others leave
        // an open half-plane at P
        return StabilityVerdict {
            stable: true,
            marginal: gap >= PI - eps,
        };
    }
    if gap > PI + eps {
        return StabilityVerdict::UNSTABLE;
    }
    let mut marginal = (gap - PI).abs() <= eps;
    if !marginal && touching_rim {
        marginal = max_gap_of_directions(&mut inner_dirs) >= PI - eps;
    }
    StabilityVerdict {
        stable: true,
        marginal,
    }
}

/// Stability for any scene kind.
pub fn is_stable(p: Point2, scene: &Scene) -> StabilityVerdict {
    match &scene.footholds {
        Footholds::Points(_) => is_stable_point_footholds(p, scene),
        Footholds::Polygons(_) => crate::polygonal::classify_polygonal(p, scene),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub min: Point2,
    pub max: Point2,
}

impl Bbox {
    pub fn new(min: Point2, max: Point2) -> Result<Bbox> {
        let ok = min.is_finite() && max.is_finite() && max.x > min.x && max.y > min.y;
        if ok {
            Ok(Bbox { min, max })
        } else {
            Err(Error::DegenerateBbox)
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Bounds of the scene geometry grown by `margin` on every side.
    pub fn around_scene(scene: &Scene, margin: f64) -> Result<Bbox> {
        let (lo, hi) = scene.bounds().ok_or(Error::DegenerateBbox)?;
        Bbox::new(
            Point2::new(lo.x - margin, lo.y - margin),
            Point2::new(hi.x + margin, hi.y + margin),
        )
    }
}

/// Row-major grid of stability verdicts at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub bbox: Bbox,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        cell_center(&self.bbox, self.nx, self.ny, i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[j * self.nx + i]
    }

    pub fn stable_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn cell_diagonal(&self) -> f64 {
        (self.bbox.width() / self.nx as f64).hypot(self.bbox.height() / self.ny as f64)
    }

    /// Row-major bitset, least significant bit first, base64 encoded.
    pub fn to_base64(&self) -> String {
        let mut bytes = vec![0u8; self.cells.len().div_ceil(8)];
        for (k, &c) in self.cells.iter().enumerate() {
            if c {
                bytes[k / 8] |= 1 << (k % 8);
            }
        }
        base64::engine::general_purpose::STANDARD.encode(bytes)
    }

    pub fn from_base64(bbox: Bbox, nx: usize, ny: usize, bits: &str) -> Result<OccupancyGrid> {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(bits)
            .map_err(|e| Error::InvalidScene(format!("bad grid bits: {e}")))?;
        let n = nx * ny;
        if bytes.len() != n.div_ceil(8) {
            return Err(Error::InvalidScene("grid bit count mismatch".into()));
        }
        let cells = (0..n).map(|k| bytes[k / 8] >> (k % 8) & 1 == 1).collect();
        Ok(OccupancyGrid { bbox, nx, ny, cells })
    }
}

pub(crate) fn cell_center(bbox: &Bbox, nx: usize, ny: usize, i: usize, j: usize) -> Point2 {
    Point2::new(
        bbox.min.x + bbox.width() * (i as f64 + 0.5) / nx as f64,
        bbox.min.y + bbox.height() * (j as f64 + 0.5) / ny as f64,
    )
}

/// Classify every cell centre with `classify`.
pub fn sample_grid<F>(bbox: Bbox, nx: usize, ny: usize, exec: Execution, classify: F) -> Result<OccupancyGrid>
where
    F: Fn(Point2) -> bool + Sync + Send,
{
    if nx < 2 || ny < 2 {
        return Err(Error::Resolution(nx, ny));
    }
    let cells = map_range(nx * ny, exec, |k| classify(cell_center(&bbox, nx, ny, k % nx, k / nx)));
    Ok(OccupancyGrid { bbox, nx, ny, cells })
}

/// Sample the free space of `scene` at cell centres.
pub fn grid_sample_freespace(scene: &Scene, bbox: Bbox, nx: usize, ny: usize) -> Result<OccupancyGrid> {
    grid_sample_freespace_with(scene, bbox, nx, ny, Execution::Parallel)
}

pub fn grid_sample_freespace_with(
    scene: &Scene,
    bbox: Bbox,
    nx: usize,
    ny: usize,
    exec: Execution,
) -> Result<OccupancyGrid> {
    match &scene.footholds {
        Footholds::Points(_) => sample_grid(bbox, nx, ny, exec, |p| {
            is_stable_point_footholds(p, scene).stable
        }),
        Footholds::Polygons(_) => crate::polygonal::sample_freespace_polygonal_with(scene, bbox, nx, ny, exec),
    }
}
