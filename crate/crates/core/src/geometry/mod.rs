//! Rigid-body math, point clouds and oriented bounding boxes.
//!
//! World frame convention: right-handed, Z up, X forward from the robot base
//! at identity, all lengths in meters.

mod cloud;
mod obb;
mod pose;

pub use cloud::{transform_cloud, PointCloud, SourceTag};
pub use obb::{fit_obb, OrientedBoundingBox, FIT_TOLERANCE};
pub use pose::{Pose, PoseRecord, Vec3};
