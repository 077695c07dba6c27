//! JSON grasp report and the colored debug export.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::ply::{write_colored_ply, PlyFormat};
use crate::error::Result;
use crate::geometry::{OrientedBoundingBox, Pose, Vec3};
use crate::planner::{GraspCandidate, PlanOutcome, PlannerConfig, RegistrationSummary, SceneModel};
use crate::supervisor::{SupervisionEntry, SupervisorPolicy};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxRecord {
    pub center: [f64; 3],
    /// Unit quaternion `[w, x, y, z]`.
    pub orientation: [f64; 4],
    pub half_extents: [f64; 3],
}

impl From<&OrientedBoundingBox> for BoxRecord {
    fn from(b: &OrientedBoundingBox) -> Self {
        Self {
            center: b.center.into(),
            orientation: b.pose().quaternion_wxyz(),
            half_extents: b.half_extents.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneSummary {
    pub object_label: Option<String>,
    pub object_points: usize,
    pub environment_points: usize,
    pub dropped_points: usize,
    pub reachability_map: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedGrasp {
    pub index: usize,
    pub total_cost: f64,
    /// Object extent along the closing axis (meters).
    pub expected_width: f64,
    pub grasp_pose: Pose,
    pub pre_grasp_pose: Pose,
}

/// Everything `plan` writes. Deterministic for fixed inputs unless
/// `timings_ms` is filled in.
#[derive(Debug, Clone, Serialize)]
pub struct GraspReport {
    pub version: u32,
    pub config: PlannerConfig,
    pub supervisor: SupervisorPolicy,
    pub scene: SceneSummary,
    pub registration: Option<RegistrationSummary>,
    pub object_box: BoxRecord,
    pub center_of_mass: [f64; 3],
    pub standoff: f64,
    pub candidate_count: usize,
    pub feasible_count: usize,
    pub status_counts: BTreeMap<String, usize>,
    pub selected: Option<SelectedGrasp>,
    pub ranking: Vec<usize>,
    pub candidates: Vec<GraspCandidate>,
    pub supervision: Vec<SupervisionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl GraspReport {
    pub fn new(outcome: &PlanOutcome, config: &PlannerConfig, supervisor: &SupervisorPolicy, scene: SceneSummary) -> Self {
        let mut status_counts = BTreeMap::new();
        for c in &outcome.candidates {
            let key = serde_json::to_value(c.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            *status_counts.entry(key).or_insert(0) += 1;
        }
        let selected = outcome.selected_candidate().map(|c| SelectedGrasp {
            index: c.index,
            total_cost: c.total_cost.unwrap_or(f64::NAN),
            expected_width: outcome.expected_width().unwrap_or(f64::NAN),
            grasp_pose: c.grasp_pose,
            pre_grasp_pose: c.pre_grasp_pose,
        });
        Self {
            version: REPORT_VERSION,
            config: config.clone(),
            supervisor: *supervisor,
            scene,
            registration: outcome.registration.clone(),
            object_box: BoxRecord::from(&outcome.obb),
            center_of_mass: outcome.com.into(),
            standoff: outcome.standoff,
            candidate_count: outcome.candidates.len(),
            feasible_count: outcome.feasible_count(),
            status_counts,
            selected,
            ranking: outcome.ranking.clone(),
            candidates: outcome.candidates.clone(),
            supervision: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn with_timings(mut self, outcome: &PlanOutcome) -> Self {
        self.timings_ms = Some(
            outcome
                .timings
                .stages()
                .iter()
                .map(|(name, d)| (name.to_string(), d.as_secs_f64() * 1e3))
                .collect(),
        );
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        s.push('\n');
        Ok(s)
    }
}

const ENV_COLOR: [u8; 3] = [150, 150, 150];
const OBJECT_COLOR: [u8; 3] = [40, 120, 255];
const PROBE_COLOR: [u8; 3] = [255, 200, 0];
const AXIS_COLORS: [[u8; 3]; 3] = [[255, 0, 0], [0, 200, 0], [0, 0, 255]];

/// Environment (gray), object (blue), selected grasp frame axes (X red,
/// Y green, Z blue) and gripper probe centers (yellow) as one colored cloud.
pub fn debug_points(scene: &SceneModel, outcome: &PlanOutcome) -> Vec<(Vec3, [u8; 3])> {
    let mut pts: Vec<(Vec3, [u8; 3])> = scene.environment_cloud.points().iter().map(|p| (*p, ENV_COLOR)).collect();
    pts.extend(scene.object_cloud.points().iter().map(|p| (*p, OBJECT_COLOR)));
    if let Some(c) = outcome.selected_candidate() {
        let pose = c.grasp_pose;
        for (axis, color) in [pose.x_axis(), pose.y_axis(), pose.z_axis()].into_iter().zip(AXIS_COLORS) {
            pts.extend((1..=20).map(|i| (pose.position + axis * (0.005 * i as f64), color)));
        }
        pts.extend(
            scene
                .gripper
                .collision_probes
                .iter()
                .map(|probe| (pose.transform_point(&Vec3::from(probe.center)), PROBE_COLOR)),
        );
    }
    pts
}

pub fn write_debug_export(path: impl AsRef<Path>, scene: &SceneModel, outcome: &PlanOutcome) -> Result<()> {
    write_colored_ply(path, &debug_points(scene, outcome), PlyFormat::BinaryLittleEndian)
}
