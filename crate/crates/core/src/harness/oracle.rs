use crate::geometry::{OrientedBoundingBox, PointCloud, Pose};
use crate::planner::{straight_path, CostTerms, GraspCandidate, GripperSpec};
use crate::reachability::WorkspaceBounds;

/// All probes against all points; same closed-ball semantics as the KD-tree path.
pub fn oracle_collision(pose: &Pose, gripper: &GripperSpec, env: &PointCloud) -> bool {
    gripper.collision_probes.iter().any(|probe| {
        let c = pose.transform_point(&probe.center());
        let r2 = probe.radius * probe.radius;
        env.points()
            .iter()
            .any(|p| crate::spatial::squared_distance(p, &c) <= r2)
    })
}

/// Re-checks the straight segment from pre-grasp to grasp at `step` spacing.
pub fn oracle_approach_collision(candidate: &GraspCandidate, gripper: &GripperSpec, env: &PointCloud, step: f64) -> bool {
    straight_path(&candidate.pre_grasp_pose, &candidate.grasp_pose, step)
        .iter()
        .any(|w| oracle_collision(w, gripper, env))
}

/// Every probe's straight sweep between consecutive waypoints against every
/// point, by exact point-to-segment distance.
pub fn oracle_swept_collision(candidate: &GraspCandidate, gripper: &GripperSpec, env: &PointCloud) -> bool {
    let path = &candidate.approach_path;
    path.iter().any(|w| oracle_collision(w, gripper, env))
        || path.windows(2).any(|w| {
            gripper.collision_probes.iter().any(|probe| {
                let a = w[0].transform_point(&probe.center());
                let b = w[1].transform_point(&probe.center());
                env.points()
                    .iter()
                    .any(|p| crate::spatial::segment_distance2(p, &a, &b) <= probe.radius * probe.radius)
            })
        })
}

/// Closing-axis extent by enumerating the eight box corners in the grasp frame.
pub fn oracle_width(obb: &OrientedBoundingBox, pose: &Pose) -> f64 {
    let inv = pose.inverse();
    let ys = obb.corners().map(|c| inv.transform_point(&c).y);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub fn oracle_width_rejects(candidate: &GraspCandidate, obb: &OrientedBoundingBox, gripper: &GripperSpec, closing_clearance: f64) -> bool {
    oracle_width(obb, &candidate.grasp_pose) > gripper.max_opening - closing_clearance
}

/// Clearance and margin by linear scan; availability is passed through since
/// it depends on the whole candidate grid.
pub fn oracle_cost_terms(
    candidate: &GraspCandidate,
    availability: f64,
    env: &PointCloud,
    base_pose: &Pose,
    workspace: &WorkspaceBounds,
) -> CostTerms {
    let p = candidate.grasp_pose.position;
    let clearance = env
        .points()
        .iter()
        .map(|q| (q - p).norm())
        .fold(f64::INFINITY, f64::min);
    let local = base_pose.inverse().transform_point(&p);
    let mut margin = f64::INFINITY;
    for i in 0..3 {
        margin = margin.min(local[i] - workspace.min[i]).min(workspace.max[i] - local[i]);
    }
    CostTerms {
        pregrasp_availability: availability,
        obstacle_clearance: clearance,
        workspace_margin: margin,
    }
}
