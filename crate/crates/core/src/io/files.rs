//! TOML scene, planner and arm configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ply::{load_point_cloud, write_ply, PlyFormat};
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose, Vec3};
use crate::harness::{generate_scene, SceneRecipe};
use crate::planner::{GripperSpec, PlannerConfig, SceneModel};
use crate::reachability::{ArmModel, WorkspaceBounds};
use crate::supervisor::SupervisorPolicy;

/// Current scene file version.
pub const SCENE_VERSION: u32 = 1;

/// Coordinate convention of a scene file. Only one is defined: a right-handed
/// world frame in meters with Z up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    WorldZUp,
}

/// A cloud given inline or as a path relative to the scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_label: Option<String>,
    /// Scripted gripper encoder readings, one per executed grasp attempt.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub encoder_readings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_cloud: Option<CloudSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment_cloud: Option<CloudSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gripper: Option<GripperSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_pose: Option<Pose>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workspace: Option<WorkspaceBounds>,
    /// Synthetic scene used when a cloud section is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<SceneRecipe>,
}

/// A resolved scene ready for planning.
#[derive(Debug, Clone)]
pub struct LoadedScene {
    pub scene: SceneModel,
    pub encoder_readings: Vec<f64>,
    /// Non-finite points dropped from object and environment files.
    pub dropped_points: usize,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::FileNotFound(path.to_path_buf())),
        Err(e) => Err(e.into()),
    }
}

/// Parses strict TOML, reporting the line of the first error.
pub fn parse_toml<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => format!("line {}", text[..span.start.min(text.len())].matches('\n').count() + 1),
            None => "document".to_string(),
        };
        Error::MalformedFile {
            path: path.to_path_buf(),
            location,
            message: e.message().to_string(),
        }
    })
}

fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_toml(path, &read_text(path)?)
}

fn invalid(path: &Path, message: impl Into<String>) -> Error {
    Error::MalformedFile {
        path: path.to_path_buf(),
        location: "document".into(),
        message: message.into(),
    }
}

impl SceneFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file: SceneFile = load_toml(path)?;
        if file.version != SCENE_VERSION {
            return Err(invalid(path, format!("unsupported version {} (expected {SCENE_VERSION})", file.version)));
        }
        Ok(file)
    }

    /// Loads clouds and fills missing sections from the recipe (or defaults).
    pub fn resolve(&self, path: &Path) -> Result<LoadedScene> {
        let dir = path.parent().unwrap_or(Path::new("."));
        let generated = match (&self.object_cloud, &self.recipe) {
            (Some(_), _) => None,
            (None, Some(recipe)) => Some(generate_scene(recipe)?),
            (None, None) => return Err(invalid(path, "object_cloud is required unless a recipe is given")),
        };
        let mut dropped = 0;
        let mut cloud = |source: &Option<CloudSource>, fallback: Option<&PointCloud>, required: bool| -> Result<PointCloud> {
            match (source, fallback) {
                (Some(src), _) => {
                    let (c, d) = src.load(dir, path, required)?;
                    dropped += d;
                    Ok(c)
                }
                (None, Some(c)) => Ok(c.clone()),
                (None, None) => Ok(PointCloud::empty()),
            }
        };
        let object_cloud = cloud(&self.object_cloud, generated.as_ref().map(|s| &s.object_cloud), true)?;
        let environment_cloud = cloud(&self.environment_cloud, generated.as_ref().map(|s| &s.environment_cloud), false)?;
        let recipe = self.recipe.as_ref();
        let scene = SceneModel {
            object_cloud,
            environment_cloud,
            object_label: self
                .object_label
                .clone()
                .or_else(|| recipe.and_then(|r| r.objects.first()).map(|o| o.label.clone())),
            gripper: self.gripper.clone().or_else(|| recipe.map(|r| r.gripper.clone())).unwrap_or_default(),
            base_pose: self.base_pose.or_else(|| recipe.map(|r| r.base_pose)).unwrap_or_default(),
            workspace: self.workspace.or_else(|| recipe.map(|r| r.workspace)).unwrap_or_default(),
        };
        scene.validate().map_err(|e| invalid(path, e.to_string()))?;
        if let Some(bad) = self.encoder_readings.iter().find(|w| !w.is_finite()) {
            return Err(invalid(path, format!("encoder reading {bad} is not finite")));
        }
        Ok(LoadedScene {
            scene,
            encoder_readings: self.encoder_readings.clone(),
            dropped_points: dropped,
        })
    }
}

impl CloudSource {
    fn load(&self, dir: &Path, scene_path: &Path, required: bool) -> Result<(PointCloud, usize)> {
        match (&self.path, &self.points) {
            (Some(p), None) => {
                let loaded = load_point_cloud(dir.join(p))?;
                Ok((loaded.cloud, loaded.dropped_non_finite))
            }
            (None, Some(points)) => {
                let pts: Vec<Vec3> = points.iter().map(|p| Vec3::from(*p)).collect();
                let total = pts.len();
                let finite: Vec<Vec3> = pts.into_iter().filter(|p| p.iter().all(|c| c.is_finite())).collect();
                if required && finite.is_empty() {
                    return Err(invalid(scene_path, "inline object cloud has no finite points"));
                }
                let dropped = total - finite.len();
                Ok((PointCloud::new(finite)?, dropped))
            }
            _ => Err(invalid(scene_path, "a cloud needs exactly one of `path` or `points`")),
        }
    }
}

/// Loads and resolves a scene file in one step.
pub fn load_scene(path: impl AsRef<Path>) -> Result<LoadedScene> {
    let path = path.as_ref();
    SceneFile::load(path)?.resolve(path)
}

/// Writes `scene` as `<out>` plus binary PLY side files `<stem>.object.ply`
/// and `<stem>.environment.ply` next to it. An empty environment is stored
/// inline. The recipe, if any, is embedded for reference.
pub fn write_scene(out: impl AsRef<Path>, scene: &SceneModel, recipe: Option<&SceneRecipe>) -> Result<()> {
    let out = out.as_ref();
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("scene");
    let dir = out.parent().unwrap_or(Path::new(""));
    let side = |kind: &str, cloud: &PointCloud| -> Result<CloudSource> {
        if cloud.is_empty() {
            return Ok(CloudSource {
                path: None,
                points: Some(Vec::new()),
            });
        }
        let name = format!("{stem}.{kind}.ply");
        write_ply(dir.join(&name), cloud, PlyFormat::BinaryLittleEndian)?;
        Ok(CloudSource {
            path: Some(name.into()),
            points: None,
        })
    };
    let file = SceneFile {
        version: SCENE_VERSION,
        frame: Frame::WorldZUp,
        object_label: scene.object_label.clone(),
        encoder_readings: Vec::new(),
        object_cloud: Some(side("object", &scene.object_cloud)?),
        environment_cloud: Some(side("environment", &scene.environment_cloud)?),
        gripper: Some(scene.gripper.clone()),
        base_pose: Some(scene.base_pose),
        workspace: Some(scene.workspace),
        recipe: recipe.cloned(),
    };
    let text = toml::to_string(&file).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    fs::write(out, text)?;
    Ok(())
}

/// Loads a recipe file: a bare [`SceneRecipe`] document.
pub fn load_recipe(path: impl AsRef<Path>) -> Result<SceneRecipe> {
    let path = path.as_ref();
    let recipe: SceneRecipe = load_toml(path)?;
    recipe.validate().map_err(|e| invalid(path, e.to_string()))?;
    Ok(recipe)
}

/// Planner settings plus the supervisor policy, as `[planner]` and
/// `[supervisor]` tables. Both are optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub supervisor: SupervisorPolicy,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let cfg: ConfigFile = load_toml(path)?;
        cfg.planner.validate().map_err(|e| invalid(path, e.to_string()))?;
        Ok(cfg)
    }
}

/// Input for `build-reachmap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmConfig {
    pub arm: ArmModel,
    /// Voxel edge length (meters).
    pub resolution: f64,
    pub direction_bins: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            arm: ArmModel::default(),
            resolution: 0.05,
            direction_bins: 26,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

impl ArmConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_toml(path.as_ref())
    }
}
