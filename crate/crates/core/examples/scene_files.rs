//! Round-trip the file formats: write a generated scene as TOML plus PLY,
//! load it back, plan, and emit the JSON report and a colored debug cloud.
//!
//! cargo run --release --example scene_files -- [output-dir]

use std::path::PathBuf;

use graspkit::harness::{cube_on_table, generate_scene};
use graspkit::io::{load_point_cloud, load_scene, write_debug_export, write_scene, GraspReport, SceneSummary};
use graspkit::planner::{Planner, PlannerConfig};
use graspkit::supervisor::SupervisorPolicy;

fn main() -> graspkit::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let recipe = cube_on_table(9);
    let scene = generate_scene(&recipe)?;
    let scene_path = dir.join("cube.toml");
    write_scene(&scene_path, &scene, Some(&recipe))?;
    let object = load_point_cloud(dir.join("cube.object.ply"))?;
    println!("wrote {} ({} object points on disk)", scene_path.display(), object.cloud.len());

    let loaded = load_scene(&scene_path)?;
    let config = PlannerConfig::default();
    let out = Planner::new().plan(&loaded.scene, &config)?;

    let summary = SceneSummary {
        object_label: loaded.scene.object_label.clone(),
        object_points: loaded.scene.object_cloud.len(),
        environment_points: loaded.scene.environment_cloud.len(),
        dropped_points: loaded.dropped_points,
        reachability_map: false,
    };
    let report = GraspReport::new(&out, &config, &SupervisorPolicy::default(), summary);
    let report_path = dir.join("cube_report.json");
    std::fs::write(&report_path, report.to_json()?)?;
    let debug_path = dir.join("cube_debug.ply");
    write_debug_export(&debug_path, &loaded.scene, &out)?;
    println!(
        "selected #{} of {} feasible; report {}, debug cloud {}",
        out.selected.unwrap(),
        report.feasible_count,
        report_path.display(),
        debug_path.display()
    );
    Ok(())
}
