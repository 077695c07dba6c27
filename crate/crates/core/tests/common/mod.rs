//! Independent re-implementations used to cross-check the planner.
#![allow(dead_code)]

use graspkit::geometry::{OrientedBoundingBox, Pose, Vec3};
use graspkit::harness::{oracle_approach_collision, oracle_collision, oracle_swept_collision, oracle_width};
use graspkit::planner::{CostWeights, GraspCandidate, PlanOutcome, PlannerConfig, SceneModel};
use graspkit::reachability::{is_reachable, ReachabilityMap, WorkspaceBounds};
use graspkit::spatial::squared_distance;

/// Re-runs every filter on one candidate by brute force. Returns the first
/// failing check.
pub fn reverify(c: &GraspCandidate, scene: &SceneModel, obb: &OrientedBoundingBox, config: &PlannerConfig) -> Result<(), String> {
    let env = &scene.environment_cloud;
    if oracle_collision(&c.grasp_pose, &scene.gripper, env) {
        return Err(format!("#{} collides at the grasp pose", c.index));
    }
    if oracle_swept_collision(c, &scene.gripper, env) {
        return Err(format!("#{} collides along the approach", c.index));
    }
    let width = oracle_width(obb, &c.grasp_pose);
    if width > scene.gripper.max_opening - config.closing_clearance {
        return Err(format!("#{} is {width} m wide", c.index));
    }
    Ok(())
}

/// Dense 1 mm waypoint re-check of the approach path.
pub fn reverify_dense(c: &GraspCandidate, scene: &SceneModel) -> Result<(), String> {
    if oracle_approach_collision(c, &scene.gripper, &scene.environment_cloud, 0.001) {
        return Err(format!("#{} collides on the 1 mm path re-check", c.index));
    }
    Ok(())
}

/// Elevation of the approach direction above the horizontal (radians).
pub fn approach_elevation(c: &GraspCandidate) -> f64 {
    (-c.grasp_pose.x_axis().z).clamp(-1.0, 1.0).asin()
}

fn workspace_margin(ws: &WorkspaceBounds, base: &Pose, p: &Vec3) -> f64 {
    let local = base.inverse().transform_point(p);
    let mut m = f64::INFINITY;
    for i in 0..3 {
        m = m.min(local[i] - ws.min[i]).min(ws.max[i] - local[i]);
    }
    m
}

/// Total cost of every feasible candidate, recomputed from scratch:
/// availability over face neighbors on the (polar, azimuth, twist) grid,
/// clearance and margin by linear scan.
pub fn brute_force_costs(
    outcome: &PlanOutcome,
    scene: &SceneModel,
    config: &PlannerConfig,
    map: Option<&ReachabilityMap>,
    weights: &CostWeights,
) -> Vec<Option<f64>> {
    let dims = [config.n_polar, config.n_azimuth, config.twist_angles_deg.len()];
    let base_inv = scene.base_pose.inverse();
    let env = &scene.environment_cloud;
    let ok: Vec<bool> = outcome
        .candidates
        .iter()
        .map(|c| {
            map.is_none_or(|m| is_reachable(m, &base_inv.compose(&c.pre_grasp_pose)))
                && !oracle_collision(&c.pre_grasp_pose, &scene.gripper, env)
        })
        .collect();
    let index = |p: usize, a: usize, t: usize| (p * dims[1] + a) * dims[2] + t;
    outcome
        .candidates
        .iter()
        .map(|c| {
            if !c.is_feasible() {
                return None;
            }
            let t = c.index % dims[2];
            let a = (c.index / dims[2]) % dims[1];
            let p = c.index / (dims[2] * dims[1]);
            let mut neighbors = Vec::new();
            if p > 0 {
                neighbors.push(index(p - 1, a, t));
            }
            if p + 1 < dims[0] {
                neighbors.push(index(p + 1, a, t));
            }
            if a > 0 {
                neighbors.push(index(p, a - 1, t));
            }
            if a + 1 < dims[1] {
                neighbors.push(index(p, a + 1, t));
            }
            if t > 0 {
                neighbors.push(index(p, a, t - 1));
            }
            if t + 1 < dims[2] {
                neighbors.push(index(p, a, t + 1));
            }
            let avail = if neighbors.is_empty() {
                if ok[c.index] { 1.0 } else { 0.0 }
            } else {
                neighbors.iter().filter(|&&n| ok[n]).count() as f64 / neighbors.len() as f64
            };
            let g = c.grasp_pose.position;
            let clear = env
                .points()
                .iter()
                .map(|q| squared_distance(q, &g))
                .fold(f64::INFINITY, f64::min)
                .sqrt();
            let margin = workspace_margin(&scene.workspace, &scene.base_pose, &g);
            Some(
                weights.w_pregrasp * (1.0 - avail)
                    + weights.w_clearance * (-clear / weights.sigma_clearance).exp()
                    + weights.w_margin * (-margin / weights.sigma_margin).exp(),
            )
        })
        .collect()
}

/// Index of the smallest cost; ties go to the lower index.
pub fn brute_force_argmin(costs: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in costs.iter().enumerate() {
        if let Some(c) = c {
            if best.is_none_or(|(_, b)| *c < b) {
                best = Some((i, *c));
            }
        }
    }
    best.map(|(i, _)| i)
}
