//! Free space of a spider robot: the set of body placements from which a
//! stable, reachable set of footholds exists.
//!
//! For point footholds the boundary is computed exactly, circle by circle,
//! from envelopes of curves on the torus `C_i x S^1`, then stitched along
//! the segments joining footholds. For polygonal foothold regions the crate
//! offers the stability predicate, sampled free space and the 2-contact
//! tracing curves of a ladder.

pub mod arrangement;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod freespace;
pub mod geom;
pub mod io;
pub mod par;
pub mod polygonal;
pub mod render;
pub mod scene;
pub mod stability;
pub mod torus;
pub mod verify;

pub use error::{Error, Result};
pub use freespace::{compute_freespace, BoundaryEdge, FreeSpace};
pub use geom::{Angle, AngleInterval, Circle, Point2};
pub use par::Execution;
pub use scene::{Footholds, Scene};
pub use stability::{grid_sample_freespace, is_stable_point_footholds, Bbox, OccupancyGrid, StabilityVerdict};
