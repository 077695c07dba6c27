//! Simulate grasp execution with scripted gripper encoder readings: failed
//! grasps are excluded and replanned until the retry budget runs out.
//!
//! cargo run --release --example retry_and_handover

use graspkit::harness::{cube_on_table, generate_scene};
use graspkit::planner::{Planner, PlannerConfig};
use graspkit::supervisor::{classify_outcome, run_episode, SupervisorPolicy};

fn main() -> graspkit::Result<()> {
    let scene = generate_scene(&cube_on_table(3))?;
    let config = PlannerConfig::default();
    let policy = SupervisorPolicy::default();

    let max = scene.gripper.max_opening;
    for (enc, expected) in [(0.001, 0.06), (0.058, 0.06), (0.02, 0.06)] {
        println!("encoder {enc:.3} m, expected {expected:.3} m -> {:?}", classify_outcome(enc, expected, max, &policy)?);
    }

    let scripts: [(&str, &[f64]); 3] = [
        ("first grasp holds", &[0.06]),
        ("one slip, then success", &[0.015, 0.06]),
        ("fingers keep closing empty", &[0.0, 0.0, 0.0, 0.0]),
    ];
    for (name, readings) in scripts {
        let episode = run_episode(&Planner::new(), &scene, &config, &policy, readings)?;
        println!("{name}:");
        for e in &episode.log {
            println!(
                "  attempt {} on candidate {:>3}: read {:.3} m, expected {:.3} m -> {:?}, {:?}",
                e.attempt, e.candidate, e.encoder_width, e.expected_width, e.outcome, e.action
            );
        }
    }
    Ok(())
}
