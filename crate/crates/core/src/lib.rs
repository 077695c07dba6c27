//! Grasp proposal planning for mobile manipulators.
//!
//! Given a segmented object cloud and a composite environment cloud, the
//! planner fits an oriented bounding box (optionally after completing the
//! partial view by registering a known model), samples grasp poses on the
//! robot-facing upper quarter of a sphere around the object, rejects poses
//! whose gripper or approach path collides with the environment or whose
//! closing width is too small, and picks the cheapest survivor under an
//! affordability cost.
//!
//! Supporting pieces: a static KD-tree, point-to-point ICP, a Monte-Carlo
//! reachability map with base alignment, a retry/handover supervisor,
//! synthetic scene generation, and file formats for the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod planner;
pub mod reachability;
pub mod registration;
pub mod spatial;
pub mod supervisor;

pub use error::{Error, Result};
