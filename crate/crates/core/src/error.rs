use thiserror::Error;

use crate::arrangement::GpViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("coincident circles")]
    CoincidentCircles,
    #[error("general-position violation: {0}")]
    GeneralPosition(String),
    #[error("scene violates general position ({} violation(s)): {}", .0.len(), summarize(.0))]
    RejectedScene(Vec<GpViolation>),
    #[error("spoke cannot reach u = {u}")]
    SpokeCannotReach { u: f64 },
    #[error("inconsistent envelope lifts: {0}")]
    InconsistentLifts(String),
    #[error("degenerate bounding box")]
    DegenerateBbox,
    #[error("grid resolution must be at least 2x2, got {0}x{1}")]
    Resolution(usize, usize),
    #[error("R must be positive")]
    NonPositiveReach,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("operation requires a {expected} scene")]
    SceneKind { expected: &'static str },
    #[error("boundary stitching failed: {0}")]
    Stitching(String),
    #[error("polygon hypotheses violated: {0}")]
    Hypothesis(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("usage: {0}")]
    Usage(String),
}

fn summarize(v: &[GpViolation]) -> String {
    v.iter()
        .take(5)
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
