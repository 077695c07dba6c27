use serde::Serialize;

use crate::geometry::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Pending,
    /// Skipped on request, e.g. a grasp that already failed during a retry.
    Excluded,
    RejectedCollision,
    RejectedApproach,
    RejectedWidth,
    RejectedUnreachable,
    Feasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostTerms {
    /// Fraction of neighboring pre-grasp poses that are reachable and collision free.
    pub pregrasp_availability: f64,
    /// Distance from the grasp position to the nearest environment point (meters);
    /// infinite when the environment is empty.
    pub obstacle_clearance: f64,
    /// Signed distance from the grasp position to the nearest workspace face (meters).
    pub workspace_margin: f64,
}

/// Position of a candidate on the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridCell {
    pub polar: usize,
    pub azimuth: usize,
    pub twist: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraspCandidate {
    pub index: usize,
    pub cell: GridCell,
    /// Elevation above the horizontal plane (radians, 0 = side, π/2 = top-down).
    pub polar_angle: f64,
    /// World heading of the candidate position seen from the CoM (radians).
    pub azimuth: f64,
    pub twist_angle: f64,
    /// End-effector frame: X approach, Y closing, Z finger axis.
    pub grasp_pose: Pose,
    pub pre_grasp_pose: Pose,
    #[serde(skip)]
    pub approach_path: Vec<Pose>,
    pub status: CandidateStatus,
    pub cost_terms: Option<CostTerms>,
    pub total_cost: Option<f64>,
}

impl GraspCandidate {
    pub fn is_feasible(&self) -> bool {
        self.status == CandidateStatus::Feasible
    }
}
