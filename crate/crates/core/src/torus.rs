//! Traces of the helicoidal volumes `H_i` on the torus `C_i0 x S^1`.
//!
//! A point of the torus is `(u, theta)` with `u` the position `U(u)` on
//! `C_i0` and `theta` a half-disk orientation. Foothold `s_i` supports the
//! column over `u` on the closed `theta`-interval from `rho^-(u)` to
//! `rho^+(u) = rho^-(u) + pi`, where `rho^+(u)` is the polar angle of
//! `U(u) - s_i`. Each trace is cut into `u`-monotone pieces whose relative
//! angle `w = theta - u` stays in one of three bands, so that pieces of one
//! class can be compared as real numbers.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use serde::Serialize;

use crate::arrangement::NeighborTable;
use crate::error::{Error, Result};
use crate::geom::{lift_near, Angle, AngleInterval, Point2};
use crate::io::Num;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DistanceCase {
    Near,
    Mid,
    Far,
    /// The foothold of the torus itself.
    Own,
    OutOfRange,
}

pub fn classify_distance_case(d: f64, reach: f64) -> Result<DistanceCase> {
    classify_distance_case_eps(d, reach, crate::geom::DEFAULT_EPS)
}

/// `eps` is relative to `reach`. `d = sqrt(2) R` is `Far`.
pub fn classify_distance_case_eps(d: f64, reach: f64, eps: f64) -> Result<DistanceCase> {
    let tol = eps * reach;
    if d <= tol {
        return Ok(DistanceCase::Own);
    }
    if (d - reach).abs() <= tol || (d - 2.0 * reach).abs() <= tol {
        return Err(Error::GeneralPosition(format!("foothold distance {d} is R or 2R")));
    }
    Ok(if d < reach {
        DistanceCase::Near
    } else if d < SQRT_2 * reach - tol {
        DistanceCase::Mid
    } else if d < 2.0 * reach {
        DistanceCase::Far
    } else {
        DistanceCase::OutOfRange
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Omega {
    One,
    Two,
}

/// Band of `w = theta - u` occupied by a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WBand {
    /// `[-pi/2, pi/2]`
    Low,
    /// `[pi/2, 3pi/2]`
    High,
    /// `[-3pi/2, -pi/2]`
    LowShift,
}

impl WBand {
    pub fn center(self) -> f64 {
        match self {
            WBand::Low => 0.0,
            WBand::High => PI,
            WBand::LowShift => -PI,
        }
    }

    pub fn range(self) -> (f64, f64) {
        let c = self.center();
        (c - FRAC_PI_2, c + FRAC_PI_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PieceSign {
    Plus,
    Minus,
}

/// Why a piece stops at one of its `u`-ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EndCause {
    /// `U(u)` is a crossing of `C_i0` with `C_i`.
    Vertex(usize),
    /// An artificial cut; the trace continues in another piece.
    Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusPiece {
    pub i0: usize,
    pub i: usize,
    pub k: usize,
    pub sign: PieceSign,
    /// Lifted `u`-domain, `u_lo < u_hi`.
    pub u_lo: f64,
    pub u_hi: f64,
    pub omega: Omega,
    pub band: WBand,
    pub causes: [EndCause; 2],
    pub center: Point2,
    pub foothold: Point2,
    pub reach: f64,
}

impl TorusPiece {
    pub fn u_interval(&self) -> AngleInterval {
        AngleInterval::from_lifted(self.u_lo, self.u_hi)
    }

    pub fn is_own(&self) -> bool {
        self.i == self.i0
    }

    /// Lifted `theta` at `u`, with `theta - u` in the piece's band. Only
    /// meaningful for `u` in the piece's domain (modulo `2pi`).
    pub fn eval(&self, u: f64) -> f64 {
        match self.sign {
            PieceSign::Plus => self.plus_lifted(u, self.band.center()),
            PieceSign::Minus => self.plus_lifted(u, self.band.center() + PI) - PI,
        }
    }

    fn plus_lifted(&self, u: f64, center: f64) -> f64 {
        if self.is_own() {
            // U(u) - s_i0 points along u
            return u + lift_near(0.0, center);
        }
        let raw = plus_raw(self.center, self.foothold, self.reach, u);
        u + lift_near(raw - u, center)
    }
}

fn spoke_point(center: Point2, reach: f64, u: f64) -> Point2 {
    center + Point2::from_polar(u) * reach
}

fn plus_raw(center: Point2, foothold: Point2, reach: f64, u: f64) -> f64 {
    (spoke_point(center, reach, u) - foothold).polar()
}

/// `theta` such that `U(u)` lies on the spoke of `C_i` at `theta` (`Plus`)
/// or at `theta + pi` (`Minus`).
pub fn rho_theta(u: f64, center: Point2, foothold: Point2, reach: f64, sign: PieceSign) -> Result<Angle> {
    let q = spoke_point(center, reach, u);
    if q.dist(foothold) > reach * (1.0 + crate::geom::DEFAULT_EPS) {
        return Err(Error::SpokeCannotReach { u });
    }
    let plus = if center == foothold { u } else { (q - foothold).polar() };
    Ok(Angle::new(match sign {
        PieceSign::Plus => plus,
        PieceSign::Minus => plus - PI,
    }))
}

/// All pieces on the torus of foothold `i0`: every neighbour's trace plus
/// the two blocks of the trace of `s_i0` itself.
pub fn build_pieces(i0: usize, scene: &Scene, table: &NeighborTable) -> Result<Vec<TorusPiece>> {
    let pts = scene.require_points()?;
    let r = scene.reach;
    let c = pts[i0];
    let mut out = Vec::new();
    let mut push = |i: usize, k: usize, lo: f64, hi: f64, omega: Omega, upper: WBand, lower: WBand, causes| {
        for (sign, band) in [(PieceSign::Plus, upper), (PieceSign::Minus, lower)] {
            out.push(TorusPiece {
                i0,
                i,
                k,
                sign,
                u_lo: lo,
                u_hi: hi,
                omega,
                band,
                causes,
                center: c,
                foothold: pts[i],
                reach: r,
            });
        }
    };
    for nb in table.neighbors(i0) {
        let i = nb.index;
        let case = classify_distance_case_eps(nb.dist, r, scene.eps)?;
        let beta = (pts[i] - c).polar();
        let a = (nb.dist / (2.0 * r)).clamp(-1.0, 1.0).acos();
        let (lo, hi) = (beta - a, beta + a);
        let v0 = EndCause::Vertex(i);
        let split = EndCause::Split;
        use {Omega::*, WBand::*};
        match case {
            DistanceCase::Far => push(i, 1, lo, hi, One, High, Low, [v0, v0]),
            DistanceCase::Mid => {
                let t = (r / nb.dist).clamp(-1.0, 1.0).acos();
                push(i, 1, lo, beta - t, Two, Low, LowShift, [v0, split]);
                push(i, 2, beta - t, beta + t, One, High, Low, [split, split]);
                push(i, 3, beta + t, hi, Two, Low, LowShift, [split, v0]);
            }
            DistanceCase::Near => {
                push(i, 1, lo, beta, Two, Low, LowShift, [v0, split]);
                push(i, 2, beta, hi, Two, Low, LowShift, [split, v0]);
            }
            DistanceCase::Own | DistanceCase::OutOfRange => {}
        }
    }
    use {Omega::*, WBand::*};
    let split = [EndCause::Split, EndCause::Split];
    push(i0, 1, 0.0, PI, Two, Low, LowShift, split);
    push(i0, 2, PI, TAU, Two, Low, LowShift, split);
    Ok(out)
}

#[derive(Serialize)]
struct PieceDump {
    i0: usize,
    i: usize,
    k: usize,
    sign: PieceSign,
    omega: Omega,
    band: WBand,
    u_start: Num,
    u_extent: Num,
    samples: Vec<[Num; 2]>,
}

/// Pieces with 64 sampled `(u, theta)` pairs each, for plotting.
pub fn pieces_json(pieces: &[TorusPiece]) -> serde_json::Value {
    let dumps: Vec<PieceDump> = pieces
        .iter()
        .map(|p| PieceDump {
            i0: p.i0,
            i: p.i,
            k: p.k,
            sign: p.sign,
            omega: p.omega,
            band: p.band,
            u_start: Num(p.u_lo),
            u_extent: Num(p.u_hi - p.u_lo),
            samples: (0..64)
                .map(|s| {
                    let u = p.u_lo + (p.u_hi - p.u_lo) * s as f64 / 63.0;
                    [Num(u), Num(p.eval(u))]
                })
                .collect(),
        })
        .collect();
    serde_json::to_value(dumps).expect("plain data serializes")
}
