//! Plan a grasp for a cube on a table and for the same cube boxed in by
//! walls, printing the candidate breakdown and the best few grasps.
//!
//! cargo run --release --example plan_grasp

use std::collections::BTreeMap;

use graspkit::harness::{cube_in_tight_box, cube_on_table, generate_scene, SceneRecipe};
use graspkit::planner::{Planner, PlannerConfig};

fn show(name: &str, recipe: &SceneRecipe) -> graspkit::Result<()> {
    let scene = generate_scene(recipe)?;
    let config = PlannerConfig::default();
    let out = Planner::new().evaluate(&scene, &config)?;

    let mut counts = BTreeMap::new();
    for c in &out.candidates {
        *counts.entry(format!("{:?}", c.status)).or_insert(0) += 1;
    }
    println!(
        "{name}: {} object / {} environment points, standoff {:.3} m, {:?}",
        scene.object_cloud.len(),
        scene.environment_cloud.len(),
        out.standoff,
        out.timings.total
    );
    println!("  {counts:?}");
    for &i in out.ranking.iter().take(5) {
        let c = &out.candidates[i];
        let t = c.cost_terms.expect("ranked candidates are scored");
        println!(
            "  #{i:<3} elevation {:>4.0} azimuth {:>5.0} twist {:>4.0}  cost {:.4}  (availability {:.2}, clearance {:.3} m, margin {:.3} m)",
            c.polar_angle.to_degrees(),
            c.azimuth.to_degrees(),
            c.twist_angle.to_degrees(),
            c.total_cost.unwrap(),
            t.pregrasp_availability,
            t.obstacle_clearance,
            t.workspace_margin
        );
    }
    Ok(())
}

fn main() -> graspkit::Result<()> {
    show("cube on table", &cube_on_table(1))?;
    show("cube in tight box", &cube_in_tight_box(1))?;
    Ok(())
}
