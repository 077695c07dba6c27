//! File formats: point clouds, scene and configuration files, reachability
//! maps and the grasp report.

mod files;
mod ply;
mod reachmap;
mod report;

pub use files::{load_recipe, load_scene, parse_toml, write_scene, ArmConfig, CloudSource, ConfigFile, Frame, LoadedScene, SceneFile, SCENE_VERSION};
pub use ply::{load_model_library, load_point_cloud, write_colored_ply, write_ply, LoadedCloud, PlyFormat};
pub use reachmap::{load_reachability_map, write_reachability_map};
pub use report::{debug_points, write_debug_export, BoxRecord, GraspReport, SceneSummary, SelectedGrasp, REPORT_VERSION};
