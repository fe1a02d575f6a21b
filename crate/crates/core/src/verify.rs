//! Self-contained oracle run: random general-position scenes, the exact
//! boundary against the stability predicate on a grid, and marginality of
//! every boundary edge.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arrangement::validate_general_position_tol;
use crate::error::Result;
use crate::freespace::{compute_freespace_with, BoundaryIndex, FreeSpace};
use crate::geom::Point2;
use crate::io::{point_json, Num};
use crate::par::{map_range, Execution};
use crate::scene::Scene;
use crate::stability::{cell_center, is_stable_point_footholds, Bbox};

/// Margin used when rejecting random scenes that are close to degenerate.
pub const GP_MARGIN: f64 = 1e-6;
/// Tolerance on `|gap - pi|` when checking that boundary edges are marginal.
pub const MARGINAL_EPS: f64 = 1e-6;
/// Edge count bound `|dF| <= EDGE_C * |A| + EDGE_C0`.
pub const EDGE_C: usize = 16;
pub const EDGE_C0: usize = 16;

/// `n` uniform footholds in a square of side `sqrt(n) R`, resampled until
/// the scene is in general position with margin [`GP_MARGIN`].
pub fn random_gp_scene(rng: &mut ChaCha8Rng, n: usize, reach: f64) -> Scene {
    let side = (n as f64).sqrt() * reach;
    loop {
        let pts: Vec<Point2> = (0..n)
            .map(|_| Point2::new(rng.random_range(0.0..side), rng.random_range(0.0..side)))
            .collect();
        let Ok(scene) = Scene::points(reach, pts) else { continue };
        if matches!(validate_general_position_tol(&scene, GP_MARGIN), Ok(v) if v.is_empty()) {
            return scene;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneCheck {
    pub n: usize,
    pub samples: usize,
    pub disagreements: usize,
    pub band_excluded: usize,
    /// Up to ten sample points where the boundary and the predicate disagree.
    pub disagreement_points: Vec<Point2>,
    pub boundary_edges: usize,
    /// Edges whose midpoint is not marginal.
    pub unsound_edges: usize,
    pub arrangement_size: usize,
    pub arcs_per_circle: Vec<usize>,
    pub diagnostics: Vec<String>,
}

impl SceneCheck {
    pub fn edge_bound_holds(&self) -> bool {
        self.boundary_edges <= EDGE_C * self.arrangement_size + EDGE_C0
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "samples": self.samples,
            "disagreements": self.disagreements,
            "boundary_band_excluded": self.band_excluded,
            "disagreement_points": self.disagreement_points.iter().map(|p| point_json(*p)).collect::<Vec<_>>(),
            "boundary_edges": self.boundary_edges,
            "unsound_edges": self.unsound_edges,
            "arrangement_size": self.arrangement_size,
            "arcs_per_circle": self.arcs_per_circle,
            "diagnostics": self.diagnostics,
        })
    }
}

/// The sampling box: the footholds' bounding box inflated by `R`.
pub fn oracle_bbox(scene: &Scene) -> Result<Bbox> {
    Bbox::around_scene(scene, scene.reach)
}

/// Compare point-in-`F` from the computed boundary with the predicate on
/// an `nx x ny` grid, skipping cells within `band` of the boundary
/// (default: two cell diagonals).
pub fn check_scene(scene: &Scene, fs: &FreeSpace, bbox: Bbox, nx: usize, ny: usize, band: Option<f64>, exec: Execution) -> SceneCheck {
    let diag = (bbox.width() / nx as f64).hypot(bbox.height() / ny as f64);
    let band = band.unwrap_or(2.0 * diag);
    let index = BoundaryIndex::new(fs, band);
    // 0: agree, 1: excluded, 2: disagree
    let verdicts = map_range(nx * ny, exec, |k| {
        let p = cell_center(&bbox, nx, ny, k % nx, k / nx);
        if index.distance_within_band(p).is_some() {
            return 1u8;
        }
        if is_stable_point_footholds(p, scene).stable == index.contains_point(p) {
            0
        } else {
            2
        }
    });
    let disagreement_points: Vec<Point2> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 2)
        .take(10)
        .map(|(k, _)| cell_center(&bbox, nx, ny, k % nx, k / nx))
        .collect();

    let loose = scene.clone().with_eps(MARGINAL_EPS);
    let edges: Vec<_> = fs.edges().copied().collect();
    let unsound = map_range(edges.len(), exec, |k| {
        let m = edges[k].midpoint(&fs.footholds, fs.reach);
        !is_stable_point_footholds(m, &loose).marginal
    });

    SceneCheck {
        n: fs.footholds.len(),
        samples: nx * ny,
        disagreements: verdicts.iter().filter(|&&v| v == 2).count(),
        band_excluded: verdicts.iter().filter(|&&v| v == 1).count(),
        disagreement_points,
        boundary_edges: fs.edge_count(),
        unsound_edges: unsound.iter().filter(|&&u| u).count(),
        arrangement_size: fs.stats.arrangement.size(),
        arcs_per_circle: fs.stats.arcs_per_circle.clone(),
        diagnostics: fs.diagnostics.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub scenes: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub reach: f64,
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    pub band: Option<f64>,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            scenes: 1,
            n_min: 8,
            n_max: 8,
            reach: 1.0,
            nx: 200,
            ny: 200,
            seed: 0,
            band: None,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<SceneCheck>,
    /// Wall-clock seconds, when requested.
    pub elapsed: Option<f64>,
}

impl VerifyReport {
    pub fn samples(&self) -> usize {
        self.checks.iter().map(|c| c.samples).sum()
    }

    pub fn disagreements(&self) -> usize {
        self.checks.iter().map(|c| c.disagreements).sum()
    }

    pub fn band_excluded(&self) -> usize {
        self.checks.iter().map(|c| c.band_excluded).sum()
    }

    pub fn unsound_edges(&self) -> usize {
        self.checks.iter().map(|c| c.unsound_edges).sum()
    }

    /// Largest `|dF| / (|A| + 1)` over the scenes.
    pub fn max_edge_ratio(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.boundary_edges as f64 / (c.arrangement_size + 1) as f64)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.disagreements() == 0
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "scenes": self.checks.len(),
            "samples": self.samples(),
            "disagreements": self.disagreements(),
            "boundary_band_excluded": self.band_excluded(),
            "unsound_edges": self.unsound_edges(),
            "max_edge_ratio": Num(self.max_edge_ratio()),
            "edge_bound_holds": self.checks.iter().all(SceneCheck::edge_bound_holds),
            "per_scene": self.checks.iter().map(SceneCheck::to_json).collect::<Vec<_>>(),
        });
        if let Some(t) = self.elapsed {
            v["elapsed_s"] = json!(Num(t));
        }
        v
    }
}

/// Check one given scene.
pub fn verify_scene(scene: &Scene, nx: usize, ny: usize, band: Option<f64>, exec: Execution) -> Result<SceneCheck> {
    let fs = compute_freespace_with(scene, exec)?;
    Ok(check_scene(scene, &fs, oracle_bbox(scene)?, nx, ny, band, exec))
}

/// Generate and check `opts.scenes` random scenes.
pub fn run_verify(opts: &VerifyOptions, timing: bool) -> Result<VerifyReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::with_capacity(opts.scenes);
    for _ in 0..opts.scenes {
        let n = rng.random_range(opts.n_min..=opts.n_max);
        let scene = random_gp_scene(&mut rng, n, opts.reach);
        checks.push(verify_scene(&scene, opts.nx, opts.ny, opts.band, opts.exec)?);
    }
    Ok(VerifyReport {
        checks,
        elapsed: timing.then(|| start.elapsed().as_secs_f64()),
    })
}
