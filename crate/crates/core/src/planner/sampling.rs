use std::f64::consts::FRAC_PI_2;

use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};

use super::candidate::{CandidateStatus, GraspCandidate, GridCell};
use crate::error::{Error, Result};
use crate::geometry::{OrientedBoundingBox, Pose, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub n_polar: usize,
    pub n_azimuth: usize,
    /// Rotations about the approach axis (radians).
    pub twist_angles: Vec<f64>,
    /// Distance from the CoM to the grasp pose origin (meters).
    pub standoff: f64,
    /// Extra distance back along the approach axis for the pre-grasp pose (meters).
    pub pregrasp_offset: f64,
    /// Spacing of approach path waypoints (meters).
    pub approach_step: f64,
}

/// Elevation of ring `i`: evenly spaced from horizontal to top-down,
/// a single ring sits at the horizontal.
pub fn polar_angle(i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        FRAC_PI_2 * i as f64 / (n - 1) as f64
    }
}

/// Azimuth offset of column `i` relative to the object-to-robot bearing:
/// cell centers across the half circle facing the robot.
pub fn azimuth_offset(i: usize, n: usize) -> f64 {
    -FRAC_PI_2 + (i as f64 + 0.5) * std::f64::consts::PI / n as f64
}

/// Grasp frame at elevation `polar` and world azimuth `azimuth` on a sphere
/// around `com`: X points at the CoM, Z lies in the vertical plane through
/// the approach axis with a non-negative up component.
pub fn sphere_pose(com: &Vec3, standoff: f64, polar: f64, azimuth: f64, twist: f64) -> Pose {
    let (se, ce) = polar.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    let out = Vec3::new(ce * ca, ce * sa, se);
    let x = -out;
    let z = Vec3::new(-se * ca, -se * sa, ce);
    let y = z.cross(&x);
    let base = Pose::from_axes(com + out * standoff, x, y, z);
    base.compose(&Pose::new(Vec3::zeros(), UnitQuaternion::from_axis_angle(&Vec3::x_axis(), twist)))
}

/// Straight path from `from` to `to` (inclusive) with at most `step` between waypoints.
pub fn straight_path(from: &Pose, to: &Pose, step: f64) -> Vec<Pose> {
    let len = from.distance_to(to);
    let n = if step > 0.0 { ((len / step - 1e-9).ceil() as usize).max(1) } else { 1 };
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            Pose::new(from.position + (to.position - from.position) * t, to.orientation)
        })
        .collect()
}

/// Samples grasp candidates on the robot-facing, above-horizon quarter of
/// the sphere of radius `standoff` around `com`.
///
/// Candidate `index = (polar * n_azimuth + azimuth) * n_twist + twist`.
pub fn sample_candidates(obb: &OrientedBoundingBox, com: &Vec3, base_pose: &Pose, params: &SamplingParams) -> Result<Vec<GraspCandidate>> {
    if params.n_polar == 0 || params.n_azimuth == 0 || params.twist_angles.is_empty() {
        return Err(Error::InvalidConfig("sampling grid needs at least one polar, azimuth and twist value".into()));
    }
    let half = obb.max_half_extent();
    if !(params.standoff > half) {
        return Err(Error::DegenerateStandoff {
            standoff: params.standoff,
            half_extent: half,
        });
    }
    let to_robot = base_pose.position - com;
    let facing = to_robot.y.atan2(to_robot.x);
    let nt = params.twist_angles.len();
    let mut out = Vec::with_capacity(params.n_polar * params.n_azimuth * nt);
    for p in 0..params.n_polar {
        let polar = polar_angle(p, params.n_polar);
        for a in 0..params.n_azimuth {
            let azimuth = facing + azimuth_offset(a, params.n_azimuth);
            for (t, &twist) in params.twist_angles.iter().enumerate() {
                let grasp = sphere_pose(com, params.standoff, polar, azimuth, twist);
                let pre = Pose::new(grasp.position - grasp.x_axis() * params.pregrasp_offset, grasp.orientation);
                out.push(GraspCandidate {
                    index: out.len(),
                    cell: GridCell { polar: p, azimuth: a, twist: t },
                    polar_angle: polar,
                    azimuth,
                    twist_angle: twist,
                    approach_path: straight_path(&pre, &grasp, params.approach_step),
                    grasp_pose: grasp,
                    pre_grasp_pose: pre,
                    status: CandidateStatus::Pending,
                    cost_terms: None,
                    total_cost: None,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fit_obb, PointCloud};

    fn unit_box() -> OrientedBoundingBox {
        let pts: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new(
                if i & 1 == 0 { -0.03 } else { 0.03 },
                if i & 2 == 0 { -0.02 } else { 0.02 },
                if i & 4 == 0 { 0.0 } else { 0.1 },
            ))
            .collect();
        fit_obb(&PointCloud::new(pts).unwrap(), true).unwrap()
    }

    fn params(n_polar: usize, n_azimuth: usize, twists: &[f64]) -> SamplingParams {
        SamplingParams {
            n_polar,
            n_azimuth,
            twist_angles: twists.iter().map(|d: &f64| d.to_radians()).collect(),
            standoff: 0.15,
            pregrasp_offset: 0.1,
            approach_step: 0.01,
        }
    }

    #[test]
    fn single_sample_points_at_com() {
        let com = Vec3::new(0.6, 0.1, 0.8);
        let c = sample_candidates(&unit_box(), &com, &Pose::identity(), &params(1, 1, &[0.0])).unwrap();
        assert_eq!(c.len(), 1);
        let to_com = (com - c[0].grasp_pose.position).normalize();
        assert!(c[0].grasp_pose.x_axis().angle(&to_com) < 1e-6);
    }

    #[test]
    fn grid_count_and_sphere_constraint() {
        let com = Vec3::new(0.6, -0.2, 0.8);
        let c = sample_candidates(&unit_box(), &com, &Pose::identity(), &params(3, 5, &[-45.0, 0.0, 45.0, 90.0])).unwrap();
        assert_eq!(c.len(), 60);
        for g in &c {
            assert!(((g.grasp_pose.position - com).norm() - 0.15).abs() < 1e-9);
            let to_com = (com - g.grasp_pose.position).normalize();
            assert!(g.grasp_pose.x_axis().angle(&to_com) < 1e-6);
            // Pre-grasp sits behind the grasp on the approach axis.
            let back = g.grasp_pose.position - g.grasp_pose.x_axis() * 0.1;
            assert!((g.pre_grasp_pose.position - back).norm() < 1e-12);
            assert!(((g.pre_grasp_pose.position - com).norm() - 0.25).abs() < 1e-9);
            assert_eq!(g.approach_path.len(), 11);
            assert!((g.approach_path.last().unwrap().position - g.grasp_pose.position).norm() < 1e-12);
            // Fingers as vertical as the approach allows: Z never points down.
            if g.twist_angle == 0.0 {
                assert!(g.grasp_pose.z_axis().z >= -1e-12);
            }
        }
    }

    #[test]
    fn never_on_far_side() {
        let com = Vec3::new(0.6, 0.4, 0.8);
        let base = Pose::from_yaw(Vec3::new(0.0, 0.0, 0.0), 0.3);
        let c = sample_candidates(&unit_box(), &com, &base, &params(4, 9, &[0.0, 90.0])).unwrap();
        let to_robot = (base.position - com).xy().normalize();
        for g in &c {
            let out = g.grasp_pose.position - com;
            assert!(out.xy().dot(&to_robot) >= -1e-12);
            assert!(out.z >= -1e-12);
        }
    }

    #[test]
    fn standoff_must_clear_box() {
        let mut p = params(1, 1, &[0.0]);
        p.standoff = 0.04;
        let r = sample_candidates(&unit_box(), &Vec3::zeros(), &Pose::from_translation(-1.0, 0.0, 0.0), &p);
        assert!(matches!(r, Err(Error::DegenerateStandoff { .. })));
    }
}
