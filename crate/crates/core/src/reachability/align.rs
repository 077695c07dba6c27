use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{bearing, ReachabilityMap};
use crate::error::{Error, Result};
use crate::geometry::{OrientedBoundingBox, Pose, Vec3};
use crate::spatial::KdTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignParams {
    /// Distances from the object center at which base poses are tried (meters).
    pub radii: Vec<f64>,
    /// Headings per radius, evenly spaced starting at the box's principal horizontal axis.
    pub headings: usize,
    /// Mobile base footprint, a vertical cylinder around the base origin.
    pub footprint_radius: f64,
    pub footprint_min_z: f64,
    pub footprint_max_z: f64,
    /// The current base is kept if it scores at least this fraction of the best candidate.
    pub keep_fraction: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self {
            radii: vec![0.55, 0.65, 0.75],
            headings: 16,
            footprint_radius: 0.3,
            footprint_min_z: 0.02,
            footprint_max_z: 0.4,
            keep_fraction: 0.9,
        }
    }
}

impl AlignParams {
    /// Angular spacing between candidate headings.
    pub fn heading_quantum(&self) -> f64 {
        TAU / self.headings as f64
    }
}

/// Candidate base poses in evaluation order: heading-major, radius-minor.
pub fn base_candidates(object: &OrientedBoundingBox, current_base: &Pose, params: &AlignParams) -> Vec<Pose> {
    let principal = principal_heading(object);
    let c = object.center;
    let mut out = Vec::with_capacity(params.headings * params.radii.len());
    for h in 0..params.headings {
        let theta = principal + TAU * h as f64 / params.headings as f64;
        for r in &params.radii {
            let pos = Vec3::new(c.x + r * theta.cos(), c.y + r * theta.sin(), current_base.position.z);
            out.push(Pose::from_yaw(pos, wrap(theta + PI)));
        }
    }
    out
}

fn principal_heading(object: &OrientedBoundingBox) -> f64 {
    let (mut best, mut best_len) = (0.0, 0.0);
    for i in 0..3 {
        let a = object.axis(i);
        let len = a.xy().norm() * object.half_extents[i];
        if len > best_len + 1e-12 {
            best_len = len;
            best = a.y.atan2(a.x);
        }
    }
    best
}

fn wrap(a: f64) -> f64 {
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

fn footprint_clear(base: &Pose, env: Option<&KdTree>, params: &AlignParams) -> bool {
    let Some(env) = env else {
        return true;
    };
    let half_h = (params.footprint_max_z - params.footprint_min_z) / 2.0;
    let mid = Vec3::new(base.position.x, base.position.y, params.footprint_min_z + half_h);
    let r = params.footprint_radius;
    let ball = (r * r + half_h * half_h).sqrt();
    !env.radius_query(&mid, ball).into_iter().any(|i| {
        let p = env.point(i);
        (p.xy() - mid.xy()).norm() <= r && p.z >= params.footprint_min_z && p.z <= params.footprint_max_z
    })
}

fn score(base: &Pose, target: &Vec3, map: &ReachabilityMap) -> f64 {
    map.interpolated_bin_count(&base.inverse().transform_point(target))
}

/// Picks a base pose facing the object that maximizes the number of
/// reachable approach directions at the object center (interpolated
/// between voxel centers).
///
/// Candidates whose footprint contains environment points are skipped. The
/// current base wins outright if its footprint is clear and it scores within
/// `keep_fraction` of the best candidate. Ties: higher score, then smaller
/// displacement from the current base, then lower candidate index.
pub fn align_base(
    object: &OrientedBoundingBox,
    map: &ReachabilityMap,
    env: Option<&KdTree>,
    current_base: &Pose,
    params: &AlignParams,
) -> Result<Pose> {
    if params.headings == 0 || params.radii.is_empty() {
        return Err(Error::InvalidConfig("base alignment needs at least one candidate".into()));
    }
    let target = object.center;
    let mut best: Option<(f64, f64, Pose)> = None;
    for cand in base_candidates(object, current_base, params) {
        if !footprint_clear(&cand, env, params) {
            continue;
        }
        let s = score(&cand, &target, map);
        if s <= 0.0 {
            continue;
        }
        let disp = cand.distance_to(current_base);
        let better = match &best {
            None => true,
            Some((bs, bd, _)) => s > *bs || (s == *bs && disp < *bd),
        };
        if better {
            best = Some((s, disp, cand));
        }
    }
    let Some((best_score, _, best_pose)) = best else {
        return Err(Error::NoValidBasePose);
    };
    let current = score(current_base, &target, map);
    if footprint_clear(current_base, env, params) && current >= params.keep_fraction * best_score {
        return Ok(*current_base);
    }
    Ok(best_pose)
}

/// Angle between the base's heading and the horizontal bearing to `target`.
pub fn heading_error(base: &Pose, target: &Vec3) -> f64 {
    wrap(bearing(&base.position, target) - base.yaw()).abs()
}
