//! Deterministic synthetic scenes and brute-force oracles.
//!
//! Every planner filter has a twin here that scans all points directly; the
//! test suite cross-checks the two.

mod fixtures;
mod models;
mod oracle;
mod scene;

pub use fixtures::{cube_in_tight_box, cube_on_table, oversized_object, tight_box_gripper};
pub use models::{partial_view, sample_model};
pub use oracle::{oracle_approach_collision, oracle_collision, oracle_cost_terms, oracle_swept_collision, oracle_width, oracle_width_rejects};
pub use scene::{generate_scene, ObjectSpec, SceneRecipe, Shape, TableSpec};
