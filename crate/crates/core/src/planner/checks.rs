use crate::geometry::{OrientedBoundingBox, PointCloud, Pose};
use crate::spatial::KdTree;

use super::candidate::GraspCandidate;
use super::gripper::GripperSpec;

/// Obstacles used for collision lookups. An empty scene has no tree.
#[derive(Debug, Clone)]
pub enum Environment {
    Empty,
    Indexed(KdTree),
}

impl Environment {
    pub fn from_cloud(cloud: &PointCloud) -> crate::Result<Self> {
        if cloud.is_empty() {
            Ok(Environment::Empty)
        } else {
            Ok(Environment::Indexed(KdTree::build(cloud)?))
        }
    }

    pub fn tree(&self) -> Option<&KdTree> {
        match self {
            Environment::Empty => None,
            Environment::Indexed(t) => Some(t),
        }
    }
}

/// True if any gripper probe placed at `pose` contains an environment point.
pub fn check_pose_collision(pose: &Pose, gripper: &GripperSpec, env: &Environment) -> bool {
    let Environment::Indexed(tree) = env else {
        return false;
    };
    gripper
        .collision_probes
        .iter()
        .any(|p| tree.any_within(&pose.transform_point(&p.center()), p.radius))
}

/// True if the gripper collides anywhere along the approach path.
///
/// Between consecutive waypoints with the same orientation each probe sweeps
/// a capsule, which is checked exactly; otherwise only the waypoints are tested.
pub fn check_approach_collision(candidate: &GraspCandidate, gripper: &GripperSpec, env: &Environment) -> bool {
    let Environment::Indexed(tree) = env else {
        return false;
    };
    let path = &candidate.approach_path;
    if path.len() == 1 {
        return check_pose_collision(&path[0], gripper, env);
    }
    path.windows(2).any(|w| {
        if w[0].orientation != w[1].orientation {
            return check_pose_collision(&w[0], gripper, env) || check_pose_collision(&w[1], gripper, env);
        }
        gripper.collision_probes.iter().any(|p| {
            let c = p.center();
            tree.any_within_segment(&w[0].transform_point(&c), &w[1].transform_point(&c), p.radius)
        })
    })
}

/// Object extent along the closing axis (grasp frame Y) of `pose`.
pub fn closing_width(obb: &OrientedBoundingBox, pose: &Pose) -> f64 {
    let y = pose.y_axis();
    // Projection of a box onto a unit axis: 2 * sum |h_i (a_i . y)|.
    2.0 * (0..3)
        .map(|i| (obb.half_extents[i] * obb.axis(i).dot(&y)).abs())
        .sum::<f64>()
}

/// True if the object is too wide for the gripper at this candidate.
pub fn check_width(candidate: &GraspCandidate, obb: &OrientedBoundingBox, gripper: &GripperSpec, closing_clearance: f64) -> bool {
    closing_width(obb, &candidate.grasp_pose) > gripper.max_opening - closing_clearance
}
