//! Grasp candidate sampling, filtering, scoring and selection.

mod candidate;
mod checks;
mod gripper;
mod pipeline;
mod sampling;
mod scoring;

pub use candidate::{CandidateStatus, CostTerms, GraspCandidate, GridCell};
pub use checks::{check_approach_collision, check_pose_collision, check_width, closing_width, Environment};
pub use gripper::{CollisionProbe, GripperSpec, DEFAULT_FINGER_WIDTH};
pub use pipeline::{plan, rank, PlanOutcome, Planner, PlannerConfig, RegistrationSummary, SceneModel, StageTimings};
pub use sampling::{azimuth_offset, polar_angle, sample_candidates, sphere_pose, straight_path, SamplingParams};
pub use scoring::{cell_index, cost_terms, grid_neighbors, neighbor_availability, score_candidate, CostWeights, ScoreContext};
