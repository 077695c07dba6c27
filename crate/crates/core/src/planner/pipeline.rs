use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidate::{CandidateStatus, GraspCandidate};
use super::checks::{check_approach_collision, check_pose_collision, check_width, closing_width, Environment};
use super::gripper::GripperSpec;
use super::sampling::{sample_candidates, SamplingParams};
use super::scoring::{score_candidate, CostWeights, ScoreContext};
use crate::error::{Error, Result};
use crate::geometry::{fit_obb, OrientedBoundingBox, PointCloud, Pose, Vec3};
use crate::reachability::{is_reachable, ReachabilityMap, WorkspaceBounds};
use crate::registration::{complete_cloud, register_model, IcpParams, ModelLibrary};

/// Planner input. Both clouds are in the world frame and disjoint: the
/// segmentation mask that produced `object_cloud` is responsible for
/// removing object points from `environment_cloud`.
#[derive(Debug, Clone)]
pub struct SceneModel {
    pub object_cloud: PointCloud,
    /// Composite camera + LiDAR cloud; may be empty.
    pub environment_cloud: PointCloud,
    pub object_label: Option<String>,
    pub gripper: GripperSpec,
    pub base_pose: Pose,
    /// Valid end-effector positions in the robot base frame.
    pub workspace: WorkspaceBounds,
}

impl SceneModel {
    pub fn validate(&self) -> Result<()> {
        if self.object_cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        self.gripper.validate()?;
        self.workspace.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub twist_angles_deg: Vec<f64>,
    /// Fixed standoff (meters). When absent: largest box half-extent +
    /// palm depth + `standoff_margin`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standoff: Option<f64>,
    pub standoff_margin: f64,
    pub pregrasp_offset: f64,
    pub approach_step: f64,
    /// Subtracted from the maximum opening in the width check (meters).
    pub closing_clearance: f64,
    pub gravity_aligned_obb: bool,
    pub weights: CostWeights,
    pub registration: IcpParams,
    /// Candidate indices to skip, e.g. grasps that already failed.
    pub excluded_candidates: Vec<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            n_polar: 4,
            n_azimuth: 9,
            twist_angles_deg: vec![-90.0, -45.0, 0.0, 45.0, 90.0],
            standoff: None,
            standoff_margin: 0.02,
            pregrasp_offset: 0.10,
            approach_step: 0.01,
            closing_clearance: 0.01,
            gravity_aligned_obb: true,
            weights: CostWeights::default(),
            registration: IcpParams::default(),
            excluded_candidates: Vec::new(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.weights;
        let positive = [self.pregrasp_offset, self.approach_step, w.sigma_clearance, w.sigma_margin];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidConfig("offsets, steps and sigmas must be positive".into()));
        }
        if [w.w_pregrasp, w.w_clearance, w.w_margin, self.closing_clearance, self.standoff_margin]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::InvalidConfig("weights and clearances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn standoff_for(&self, obb: &OrientedBoundingBox, gripper: &GripperSpec) -> f64 {
        self.standoff
            .unwrap_or(obb.max_half_extent() + gripper.palm_depth + self.standoff_margin)
    }

    pub fn sampling(&self, standoff: f64) -> SamplingParams {
        SamplingParams {
            n_polar: self.n_polar,
            n_azimuth: self.n_azimuth,
            twist_angles: self.twist_angles_deg.iter().map(|d| d.to_radians()).collect(),
            standoff,
            pregrasp_offset: self.pregrasp_offset,
            approach_step: self.approach_step,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub registration: Duration,
    pub obb: Duration,
    pub sampling: Duration,
    pub indexing: Duration,
    pub collision: Duration,
    pub approach: Duration,
    pub width: Duration,
    pub reachability: Duration,
    pub scoring: Duration,
    pub total: Duration,
}

impl StageTimings {
    pub fn stages(&self) -> [(&'static str, Duration); 10] {
        [
            ("registration", self.registration),
            ("obb", self.obb),
            ("sampling", self.sampling),
            ("indexing", self.indexing),
            ("collision", self.collision),
            ("approach", self.approach),
            ("width", self.width),
            ("reachability", self.reachability),
            ("scoring", self.scoring),
            ("total", self.total),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationSummary {
    pub model_to_scene: Pose,
    pub rmse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the completed cloud replaced the partial one.
    pub used: bool,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub obb: OrientedBoundingBox,
    pub com: Vec3,
    pub standoff: f64,
    pub registration: Option<RegistrationSummary>,
    pub candidates: Vec<GraspCandidate>,
    /// Feasible candidate indices, cheapest first.
    pub ranking: Vec<usize>,
    pub selected: Option<usize>,
    pub timings: StageTimings,
}

impl PlanOutcome {
    pub fn selected_candidate(&self) -> Option<&GraspCandidate> {
        self.selected.map(|i| &self.candidates[i])
    }

    /// Object extent along the closing axis of the selected grasp.
    pub fn expected_width(&self) -> Option<f64> {
        self.selected_candidate().map(|c| closing_width(&self.obb, &c.grasp_pose))
    }

    pub fn feasible_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.is_feasible()).count()
    }
}

/// Grasp planner with optional reachability map and model library.
#[derive(Debug, Clone, Copy, Default)]
pub struct Planner<'a> {
    pub reachability: Option<&'a ReachabilityMap>,
    pub models: Option<&'a ModelLibrary>,
}

impl<'a> Planner<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_reachability(mut self, map: &'a ReachabilityMap) -> Self {
        self.reachability = Some(map);
        self
    }

    pub fn with_models(mut self, models: &'a ModelLibrary) -> Self {
        self.models = Some(models);
        self
    }

    /// Runs the pipeline and fails with [`Error::NoFeasibleGrasp`] if nothing survives.
    pub fn plan(&self, scene: &SceneModel, config: &PlannerConfig) -> Result<PlanOutcome> {
        let out = self.evaluate(scene, config)?;
        if out.selected.is_none() {
            return Err(Error::NoFeasibleGrasp(out.candidates.len()));
        }
        Ok(out)
    }

    /// Runs the pipeline and returns every candidate with its status, even
    /// when none is feasible.
    ///
    /// Order: registration/completion (when a model exists for the label),
    /// box fit, sampling, pose collision, approach collision, width,
    /// reachability (when a map is present), scoring, stable ranking.
    pub fn evaluate(&self, scene: &SceneModel, config: &PlannerConfig) -> Result<PlanOutcome> {
        scene.validate()?;
        config.validate()?;
        let t_total = Instant::now();
        let mut timings = StageTimings::default();

        let t = Instant::now();
        let (cloud, registration) = self.complete(scene, config);
        timings.registration = t.elapsed();

        let t = Instant::now();
        let obb = fit_obb(&cloud, config.gravity_aligned_obb)?;
        let com = cloud.centroid().ok_or(Error::EmptyCloud)?;
        timings.obb = t.elapsed();

        let t = Instant::now();
        let standoff = config.standoff_for(&obb, &scene.gripper);
        let params = config.sampling(standoff);
        let mut candidates = sample_candidates(&obb, &com, &scene.base_pose, &params)?;
        for &i in &config.excluded_candidates {
            if let Some(c) = candidates.get_mut(i) {
                c.status = CandidateStatus::Excluded;
            }
        }
        timings.sampling = t.elapsed();

        let t = Instant::now();
        let env = Environment::from_cloud(&scene.environment_cloud)?;
        timings.indexing = t.elapsed();

        let gripper = &scene.gripper;
        let base_inv = scene.base_pose.inverse();
        let map = self.reachability;

        timings.collision = run_stage(&mut candidates, CandidateStatus::RejectedCollision, |c| {
            check_pose_collision(&c.grasp_pose, gripper, &env)
        });
        timings.approach = run_stage(&mut candidates, CandidateStatus::RejectedApproach, |c| {
            check_approach_collision(c, gripper, &env)
        });
        timings.width = run_stage(&mut candidates, CandidateStatus::RejectedWidth, |c| {
            check_width(c, &obb, gripper, config.closing_clearance)
        });
        if let Some(map) = map {
            timings.reachability = run_stage(&mut candidates, CandidateStatus::RejectedUnreachable, |c| {
                !is_reachable(map, &base_inv.compose(&c.grasp_pose))
            });
        }
        for c in candidates.iter_mut().filter(|c| c.status == CandidateStatus::Pending) {
            c.status = CandidateStatus::Feasible;
        }

        let t = Instant::now();
        let pregrasp_ok: Vec<bool> = candidates
            .par_iter()
            .map(|c| {
                map.is_none_or(|m| is_reachable(m, &base_inv.compose(&c.pre_grasp_pose)))
                    && !check_pose_collision(&c.pre_grasp_pose, gripper, &env)
            })
            .collect();
        let ctx = ScoreContext {
            env: &env,
            workspace: &scene.workspace,
            base_pose: &scene.base_pose,
            weights: &config.weights,
            grid_dims: [params.n_polar, params.n_azimuth, params.twist_angles.len()],
            pregrasp_ok: &pregrasp_ok,
        };
        candidates
            .par_iter_mut()
            .filter(|c| c.is_feasible())
            .for_each(|c| {
                score_candidate(c, &ctx).expect("feasible candidates are scorable");
            });
        let ranking = rank(&candidates);
        timings.scoring = t.elapsed();
        timings.total = t_total.elapsed();

        Ok(PlanOutcome {
            obb,
            com,
            standoff,
            registration,
            selected: ranking.first().copied(),
            ranking,
            candidates,
            timings,
        })
    }

    fn complete(&self, scene: &SceneModel, config: &PlannerConfig) -> (PointCloud, Option<RegistrationSummary>) {
        let model = self
            .models
            .zip(scene.object_label.as_deref())
            .and_then(|(lib, label)| lib.get(label));
        let Some(model) = model else {
            return (scene.object_cloud.clone(), None);
        };
        let Ok(result) = register_model(&scene.object_cloud, model, &config.registration) else {
            return (scene.object_cloud.clone(), None);
        };
        let completed = complete_cloud(&scene.object_cloud, model, &result).ok();
        let summary = RegistrationSummary {
            model_to_scene: result.model_to_scene,
            rmse: result.rmse,
            iterations: result.iterations,
            converged: result.converged,
            used: completed.is_some(),
        };
        (completed.unwrap_or_else(|| scene.object_cloud.clone()), Some(summary))
    }
}

/// Applies `reject` to every pending candidate in parallel.
fn run_stage(
    candidates: &mut [GraspCandidate],
    status: CandidateStatus,
    reject: impl Fn(&GraspCandidate) -> bool + Sync,
) -> Duration {
    let t = Instant::now();
    candidates
        .par_iter_mut()
        .filter(|c| c.status == CandidateStatus::Pending)
        .for_each(|c| {
            if reject(c) {
                c.status = status;
            }
        });
    t.elapsed()
}

/// Feasible indices sorted by total cost; equal costs keep sample order.
pub fn rank(candidates: &[GraspCandidate]) -> Vec<usize> {
    let mut order: Vec<usize> = candidates
        .iter()
        .filter(|c| c.is_feasible())
        .map(|c| c.index)
        .collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (candidates[a].total_cost.unwrap(), candidates[b].total_cost.unwrap());
        ca.total_cmp(&cb)
    });
    order
}

/// Runs the pipeline without a reachability map or model library.
pub fn plan(scene: &SceneModel, config: &PlannerConfig) -> Result<PlanOutcome> {
    Planner::new().plan(scene, config)
}
