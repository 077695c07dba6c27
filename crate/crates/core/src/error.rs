use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("non-finite coordinate in point cloud at index {0}")]
    NonFinitePoint(usize),
    #[error("no correspondences within {max_dist} m at initial alignment")]
    NoCorrespondences { max_dist: f64 },
    #[error("registration did not converge")]
    NotConverged,
    #[error("invalid voxel resolution {0}")]
    InvalidResolution(f64),
    #[error("invalid arm model: {0}")]
    InvalidArm(String),
    #[error("no valid base pose: every candidate collides or scores zero")]
    NoValidBasePose,
    #[error("standoff {standoff} m does not clear the object (largest half-extent {half_extent} m)")]
    DegenerateStandoff { standoff: f64, half_extent: f64 },
    #[error("candidate {0} is not feasible and cannot be scored")]
    NotFeasible(usize),
    #[error("no feasible grasp among {0} candidates")]
    NoFeasibleGrasp(usize),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("attempt history is empty")]
    EmptyHistory,
    #[error("invalid scene recipe: {0}")]
    InvalidRecipe(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("malformed file {}: {message} (at {location})", path.display())]
    MalformedFile {
        path: PathBuf,
        location: String,
        message: String,
    },
    #[error("no finite points left in {} after dropping {dropped} invalid points", path.display())]
    EmptyAfterFiltering { path: PathBuf, dropped: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
