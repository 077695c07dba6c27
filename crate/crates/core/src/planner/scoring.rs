use serde::{Deserialize, Serialize};

use super::candidate::{CostTerms, GraspCandidate, GridCell};
use super::checks::Environment;
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::reachability::WorkspaceBounds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub w_pregrasp: f64,
    pub w_clearance: f64,
    pub w_margin: f64,
    /// Length scale of the clearance penalty (meters).
    pub sigma_clearance: f64,
    /// Length scale of the workspace-margin penalty (meters).
    pub sigma_margin: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            w_pregrasp: 1.0,
            w_clearance: 1.0,
            w_margin: 0.5,
            sigma_clearance: 0.05,
            sigma_margin: 0.10,
        }
    }
}

impl CostWeights {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            w_pregrasp: self.w_pregrasp * factor,
            w_clearance: self.w_clearance * factor,
            w_margin: self.w_margin * factor,
            ..*self
        }
    }

    /// `w_p (1 - availability) + w_c exp(-clearance / σ_c) + w_m exp(-margin / σ_m)`.
    pub fn total(&self, terms: &CostTerms) -> f64 {
        self.w_pregrasp * (1.0 - terms.pregrasp_availability)
            + self.w_clearance * (-terms.obstacle_clearance / self.sigma_clearance).exp()
            + self.w_margin * (-terms.workspace_margin / self.sigma_margin).exp()
    }
}

/// Face neighbors of `cell` on the sampling grid (±1 along one of polar, azimuth, twist).
pub fn grid_neighbors(cell: GridCell, dims: [usize; 3]) -> impl Iterator<Item = GridCell> {
    let c = [cell.polar, cell.azimuth, cell.twist];
    (0..3).flat_map(move |axis| {
        [-1i64, 1].into_iter().filter_map(move |d| {
            let v = c[axis] as i64 + d;
            if v < 0 || v >= dims[axis] as i64 {
                return None;
            }
            let mut n = c;
            n[axis] = v as usize;
            Some(GridCell {
                polar: n[0],
                azimuth: n[1],
                twist: n[2],
            })
        })
    })
}

pub fn cell_index(cell: GridCell, dims: [usize; 3]) -> usize {
    (cell.polar * dims[1] + cell.azimuth) * dims[2] + cell.twist
}

/// Fraction of grid neighbors whose pre-grasp pose is available. A candidate
/// without neighbors falls back to its own pre-grasp.
pub fn neighbor_availability(cell: GridCell, dims: [usize; 3], pregrasp_ok: &[bool]) -> f64 {
    let (mut total, mut ok) = (0usize, 0usize);
    for n in grid_neighbors(cell, dims) {
        total += 1;
        ok += usize::from(pregrasp_ok[cell_index(n, dims)]);
    }
    if total == 0 {
        return if pregrasp_ok[cell_index(cell, dims)] { 1.0 } else { 0.0 };
    }
    ok as f64 / total as f64
}

/// Everything the cost function needs beyond the candidate itself.
pub struct ScoreContext<'a> {
    pub env: &'a Environment,
    /// Workspace in the robot base frame.
    pub workspace: &'a WorkspaceBounds,
    pub base_pose: &'a Pose,
    pub weights: &'a CostWeights,
    pub grid_dims: [usize; 3],
    /// Per-candidate flag: pre-grasp pose reachable and collision free.
    pub pregrasp_ok: &'a [bool],
}

pub fn cost_terms(candidate: &GraspCandidate, ctx: &ScoreContext<'_>) -> CostTerms {
    let p = candidate.grasp_pose.position;
    let clearance = ctx.env.tree().map_or(f64::INFINITY, |t| t.nearest(&p).1);
    let local = ctx.base_pose.inverse().transform_point(&p);
    CostTerms {
        pregrasp_availability: neighbor_availability(candidate.cell, ctx.grid_dims, ctx.pregrasp_ok),
        obstacle_clearance: clearance,
        workspace_margin: ctx.workspace.margin(&local),
    }
}

/// Scores a feasible candidate, storing its cost terms and total. Lower is better.
pub fn score_candidate(candidate: &mut GraspCandidate, ctx: &ScoreContext<'_>) -> Result<f64> {
    if !candidate.is_feasible() {
        return Err(Error::NotFeasible(candidate.index));
    }
    let terms = cost_terms(candidate, ctx);
    let total = ctx.weights.total(&terms);
    candidate.cost_terms = Some(terms);
    candidate.total_cost = Some(total);
    Ok(total)
}
