//! Canonical scenes: an open table, a cube boxed in on four sides, and an
//! object too large for the gripper.

use super::scene::{ObjectSpec, SceneRecipe, Shape, TableSpec};
use crate::geometry::Pose;
use crate::planner::GripperSpec;

const TABLE_HEIGHT: f64 = 0.75;
const CUBE: f64 = 0.06;
const CUBE_X: f64 = 0.6;

fn table() -> TableSpec {
    TableSpec {
        height: TABLE_HEIGHT,
        extent: [0.8, 1.2],
        center: [0.85, 0.0],
    }
}

fn cube() -> ObjectSpec {
    ObjectSpec {
        shape: Shape::Box,
        dimensions: vec![CUBE, CUBE, CUBE],
        pose: Pose::from_translation(CUBE_X, 0.0, TABLE_HEIGHT),
        label: "cube".into(),
    }
}

/// A 6 cm cube alone on an open table.
pub fn cube_on_table(seed: u64) -> SceneRecipe {
    SceneRecipe::new(seed, table(), vec![cube()])
}

/// Slim gripper whose open fingers fit the 1 cm gap around the boxed cube.
pub fn tight_box_gripper() -> GripperSpec {
    GripperSpec::parallel_jaw(0.072, 0.05, 0.003, 0.07, 0.04)
}

/// The cube inside an open-top box whose walls stand 1 cm from every side face.
pub fn cube_in_tight_box(seed: u64) -> SceneRecipe {
    let gap = 0.01;
    let thickness = 0.005;
    let height = 0.15;
    let inner = CUBE / 2.0 + gap;
    let offset = inner + thickness / 2.0;
    let span = 2.0 * (inner + thickness);
    let mut objects = vec![cube()];
    for (i, (dx, dy)) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)].into_iter().enumerate() {
        let dims = if dx != 0.0 {
            vec![thickness, span, height]
        } else {
            vec![span, thickness, height]
        };
        objects.push(ObjectSpec {
            shape: Shape::Box,
            dimensions: dims,
            pose: Pose::from_translation(CUBE_X + dx * offset, dy * offset, TABLE_HEIGHT),
            label: format!("wall_{i}"),
        });
    }
    let mut recipe = SceneRecipe::new(seed, table(), objects);
    recipe.gripper = tight_box_gripper();
    recipe
}

/// A 20 cm cube: wider than the default opening on every horizontal axis
/// and taller than the fingers.
pub fn oversized_object(seed: u64) -> SceneRecipe {
    SceneRecipe::new(
        seed,
        table(),
        vec![ObjectSpec {
            shape: Shape::Box,
            dimensions: vec![0.2, 0.2, 0.2],
            pose: Pose::from_translation(0.65, 0.0, TABLE_HEIGHT),
            label: "crate".into(),
        }],
    )
}
