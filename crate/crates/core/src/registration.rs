//! Model-to-partial-view registration (point-to-point ICP) and cloud completion.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fit_obb, transform_cloud, PointCloud, Pose, Vec3};
use crate::spatial::KdTree;

/// Known object models keyed by class label, in their own model frames.
pub type ModelLibrary = std::collections::BTreeMap<String, PointCloud>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Stop once the rmse improves by less than this (meters).
    pub convergence_eps: f64,
    /// Scene points farther than this from the model are not matched (meters).
    pub max_correspondence_dist: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            convergence_eps: 1e-6,
            max_correspondence_dist: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    pub model_to_scene: Pose,
    /// Truncated RMS residual: unmatched scene points contribute the
    /// correspondence cutoff, so the value cannot rise between iterations.
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// rmse before the first update and after every accepted update.
    pub rmse_history: Vec<f64>,
    pub inliers: usize,
}

struct Matches {
    rmse: f64,
    pairs: Vec<(Vec3, Vec3)>,
}

fn match_points(tree: &KdTree, scene: &[Vec3], pose: &Pose, cutoff: f64) -> Matches {
    let inv = pose.inverse();
    let cutoff2 = cutoff * cutoff;
    let mut sum = 0.0;
    let mut pairs = Vec::with_capacity(scene.len());
    for s in scene {
        let (j, d) = tree.nearest(&inv.transform_point(s));
        let d2 = d * d;
        if d <= cutoff {
            sum += d2;
            pairs.push((tree.point(j), *s));
        } else {
            sum += cutoff2;
        }
    }
    Matches {
        rmse: (sum / scene.len() as f64).sqrt(),
        pairs,
    }
}

/// Least-squares rigid transform mapping `src` onto `dst` (SVD of the cross-covariance).
pub fn best_fit_transform(pairs: &[(Vec3, Vec3)]) -> Option<Pose> {
    if pairs.len() < 3 {
        return None;
    }
    let n = pairs.len() as f64;
    let (cs, cd) = pairs
        .iter()
        .fold((Vec3::zeros(), Vec3::zeros()), |(a, b), (s, d)| (a + s, b + d));
    let (cs, cd) = (cs / n, cd / n);
    let mut h = Matrix3::zeros();
    for (s, d) in pairs {
        h += (s - cs) * (d - cd).transpose();
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u?, svd.v_t?);
    let v = v_t.transpose();
    let mut fix = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        fix[(2, 2)] = -1.0;
    }
    let r = v * fix * u.transpose();
    if !r.iter().all(|x| x.is_finite()) {
        return None;
    }
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    Some(Pose::new(cd - rot * cs, rot))
}

/// Point-to-point ICP estimating the pose that carries `model` onto `scene`.
pub fn icp_register(model: &PointCloud, scene: &PointCloud, init: &Pose, params: &IcpParams) -> Result<RegistrationResult> {
    for c in [model, scene] {
        if c.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: c.len() });
        }
    }
    let tree = KdTree::build(model)?;
    let scene = scene.points();
    let cutoff = params.max_correspondence_dist;

    let mut pose = *init;
    let mut current = match_points(&tree, scene, &pose, cutoff);
    if current.pairs.is_empty() {
        return Err(Error::NoCorrespondences { max_dist: cutoff });
    }
    let mut history = vec![current.rmse];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iterations {
        let Some(next_pose) = best_fit_transform(&current.pairs) else {
            break;
        };
        iterations += 1;
        let next = match_points(&tree, scene, &next_pose, cutoff);
        if next.rmse > current.rmse {
            // Rounding noise at the optimum; keep the previous estimate.
            converged = true;
            break;
        }
        let delta = current.rmse - next.rmse;
        pose = next_pose;
        current = next;
        history.push(current.rmse);
        if delta < params.convergence_eps {
            converged = true;
            break;
        }
    }
    Ok(RegistrationResult {
        model_to_scene: pose,
        rmse: current.rmse,
        iterations,
        converged,
        rmse_history: history,
        inliers: current.pairs.len(),
    })
}

/// Yaw offsets tried around the centroid alignment.
pub const YAW_SWEEP: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::PI,
    3.0 * std::f64::consts::FRAC_PI_2,
];

/// Registers a full `model` to a `partial` view without a prior pose.
///
/// Starts from the partial cloud's gravity-aligned box center matched to the
/// model centroid, sweeps four yaw offsets and keeps the lowest final rmse
/// (ties go to the earlier yaw).
pub fn register_model(partial: &PointCloud, model: &PointCloud, params: &IcpParams) -> Result<RegistrationResult> {
    for c in [model, partial] {
        if c.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: c.len() });
        }
    }
    let model_c = model.centroid().unwrap();
    let scene_c = fit_obb(partial, true)
        .map(|b| b.center)
        .unwrap_or_else(|_| partial.centroid().unwrap());
    let results: Vec<Result<RegistrationResult>> = YAW_SWEEP
        .par_iter()
        .map(|&yaw| {
            let init = Pose::from_yaw(scene_c, yaw).compose(&Pose::new(-model_c, UnitQuaternion::identity()));
            icp_register(model, partial, &init, params)
        })
        .collect();
    let mut best: Option<RegistrationResult> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.rmse < b.rmse) {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.unwrap_or(Error::NotConverged))
}

/// Union of the partial view and the registered model.
pub fn complete_cloud(partial: &PointCloud, model: &PointCloud, result: &RegistrationResult) -> Result<PointCloud> {
    if !result.converged {
        return Err(Error::NotConverged);
    }
    let placed = transform_cloud(&result.model_to_scene, model)?;
    Ok(partial.merged(&placed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Asymmetric L-shaped block surface samples.
    fn l_block(rng: &mut impl Rng, n: usize) -> PointCloud {
        let parts = [
            (Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.12, 0.04, 0.08)),
            (Vec3::new(0.0, 0.04, 0.0), Vec3::new(0.04, 0.06, 0.03)),
        ];
        let pts = (0..n)
            .map(|i| {
                let (o, e) = parts[if i % 3 == 0 { 1 } else { 0 }];
                let mut p = Vec3::new(rng.random::<f64>() * e.x, rng.random::<f64>() * e.y, rng.random::<f64>() * e.z);
                let axis = rng.random_range(0..3);
                p[axis] = if rng.random::<bool>() { 0.0 } else { e[axis] };
                o + p
            })
            .collect();
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn self_registration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = l_block(&mut rng, 400);
        let r = icp_register(&model, &model, &Pose::identity(), &IcpParams::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!(r.rmse < 1e-9);
        assert!(r.model_to_scene.position.norm() < 1e-9);
        assert!(r.model_to_scene.angle_to(&Pose::identity()) < 1e-9);
    }

    #[test]
    fn recovers_small_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = l_block(&mut rng, 500);
        let truth = Pose::from_yaw(Vec3::new(0.05, 0.0, 0.0), 10f64.to_radians());
        let scene = transform_cloud(&truth, &model).unwrap();
        let r = icp_register(&model, &scene, &Pose::identity(), &IcpParams::default()).unwrap();
        assert!(r.converged);
        assert!(r.model_to_scene.distance_to(&truth) < 1e-3, "{:?}", r.model_to_scene);
        assert!(r.model_to_scene.angle_to(&truth).to_degrees() < 0.5);
        for w in r.rmse_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn too_few_points() {
        let two = PointCloud::new(vec![Vec3::zeros(), Vec3::x()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = l_block(&mut rng, 50);
        assert!(matches!(
            icp_register(&model, &two, &Pose::identity(), &IcpParams::default()),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn far_scene_has_no_correspondences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = l_block(&mut rng, 100);
        let scene = transform_cloud(&Pose::from_translation(5.0, 0.0, 0.0), &model).unwrap();
        assert!(matches!(
            icp_register(&model, &scene, &Pose::identity(), &IcpParams::default()),
            Err(Error::NoCorrespondences { .. })
        ));
    }

    #[test]
    fn completion_counts_and_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = l_block(&mut rng, 300);
        let partial = PointCloud::new(model.points().iter().filter(|p| p.x < 0.06).copied().collect()).unwrap();
        let r = icp_register(&model, &partial, &Pose::identity(), &IcpParams::default()).unwrap();
        let done = complete_cloud(&partial, &model, &r).unwrap();
        assert_eq!(done.len(), partial.len() + model.len());
        let bad = RegistrationResult { converged: false, ..r };
        assert!(matches!(complete_cloud(&partial, &model, &bad), Err(Error::NotConverged)));
    }
}
