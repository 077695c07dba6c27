use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Pose, SourceTag, Vec3};
use crate::planner::{GripperSpec, SceneModel};
use crate::reachability::WorkspaceBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `dimensions = [size_x, size_y, size_z]`.
    Box,
    /// `dimensions = [radius, height]`.
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    /// Height of the table top (meters).
    pub height: f64,
    /// Size of the table top along X and Y (meters).
    pub extent: [f64; 2],
    /// XY position of the table center.
    #[serde(default = "default_table_center")]
    pub center: [f64; 2],
}

fn default_table_center() -> [f64; 2] {
    [0.8, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub shape: Shape,
    pub dimensions: Vec<f64>,
    /// Bottom-center of the object; must rest on the table with a yaw-only rotation.
    pub pose: Pose,
    pub label: String,
}

/// Recipe for a synthetic tabletop scene. The first object is the grasp
/// target, seen from the camera; the others become environment obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneRecipe {
    pub seed: u64,
    pub table: TableSpec,
    pub objects: Vec<ObjectSpec>,
    /// Random clutter points per square meter of table.
    #[serde(default)]
    pub clutter_density: f64,
    #[serde(default)]
    pub sensor_noise_sigma: f64,
    /// Spacing of object surface samples (meters).
    #[serde(default = "default_surface_spacing")]
    pub surface_spacing: f64,
    /// Spacing of table surface samples (meters).
    #[serde(default = "default_table_spacing")]
    pub table_spacing: f64,
    /// Virtual camera position; the target keeps only surfaces facing it.
    #[serde(default = "default_camera")]
    pub camera_position: [f64; 3],
    #[serde(default)]
    pub base_pose: Pose,
    #[serde(default)]
    pub gripper: GripperSpec,
    #[serde(default)]
    pub workspace: WorkspaceBounds,
}

fn default_surface_spacing() -> f64 {
    0.004
}

fn default_table_spacing() -> f64 {
    0.01
}

fn default_camera() -> [f64; 3] {
    [0.0, 0.0, 1.3]
}

/// Keep-out around objects for clutter points (meters).
const CLUTTER_KEEPOUT: f64 = 0.1;
const CLUTTER_MAX_HEIGHT: f64 = 0.05;

impl SceneRecipe {
    /// Recipe with defaults for everything but the table and objects.
    pub fn new(seed: u64, table: TableSpec, objects: Vec<ObjectSpec>) -> Self {
        Self {
            seed,
            table,
            objects,
            clutter_density: 0.0,
            sensor_noise_sigma: 0.0,
            surface_spacing: default_surface_spacing(),
            table_spacing: default_table_spacing(),
            camera_position: default_camera(),
            base_pose: Pose::identity(),
            gripper: GripperSpec::default(),
            workspace: WorkspaceBounds::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRecipe(m));
        if self.objects.is_empty() {
            return bad("at least one object is required".into());
        }
        if !(self.table.extent[0] > 0.0 && self.table.extent[1] > 0.0) || !self.table.height.is_finite() {
            return bad("table extent must be positive".into());
        }
        if !(self.surface_spacing > 0.0 && self.table_spacing > 0.0) {
            return bad("sample spacings must be positive".into());
        }
        if !(self.clutter_density >= 0.0 && self.sensor_noise_sigma >= 0.0) {
            return bad("clutter density and noise must be non-negative".into());
        }
        for o in &self.objects {
            let need = match o.shape {
                Shape::Box => 3,
                Shape::Cylinder => 2,
            };
            if o.dimensions.len() != need || o.dimensions.iter().any(|d| !(*d > 0.0)) {
                return bad(format!("object '{}' needs {need} positive dimensions", o.label));
            }
            if (o.pose.position.z - self.table.height).abs() > 1e-6 {
                return bad(format!("object '{}' does not rest on the table", o.label));
            }
            if o.pose.z_axis().z < 1.0 - 1e-9 {
                return bad(format!("object '{}' is tilted; only yaw rotations rest on the table", o.label));
            }
        }
        self.gripper.validate().map_err(|e| Error::InvalidRecipe(e.to_string()))?;
        self.workspace.validate().map_err(|e| Error::InvalidRecipe(e.to_string()))
    }
}

/// Surface sample with its outward normal.
struct Sample {
    point: Vec3,
    normal: Vec3,
}

/// One jittered sample per cell of a grid over the box faces (bottom excluded).
fn sample_box(dims: &[f64], spacing: f64, rng: &mut impl Rng) -> Vec<Sample> {
    let h = Vec3::new(dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0);
    let mut out = Vec::new();
    // (normal axis, sign) for the five exposed faces.
    let faces = [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0)];
    for (axis, sign) in faces {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let nu = ((2.0 * h[u] / spacing).ceil() as usize).max(1);
        let nv = ((2.0 * h[v] / spacing).ceil() as usize).max(1);
        for i in 0..nu {
            for j in 0..nv {
                let mut p = Vec3::zeros();
                p[axis] = sign * h[axis];
                p[u] = -h[u] + 2.0 * h[u] * (i as f64 + rng.random::<f64>()) / nu as f64;
                p[v] = -h[v] + 2.0 * h[v] * (j as f64 + rng.random::<f64>()) / nv as f64;
                p.z += h.z;
                let mut n = Vec3::zeros();
                n[axis] = sign;
                out.push(Sample { point: p, normal: n });
            }
        }
    }
    out
}

/// Side and top cap of a cylinder standing on its base.
fn sample_cylinder(radius: f64, height: f64, spacing: f64, rng: &mut impl Rng) -> Vec<Sample> {
    let mut out = Vec::new();
    let nt = ((TAU * radius / spacing).ceil() as usize).max(3);
    let nz = ((height / spacing).ceil() as usize).max(1);
    for i in 0..nt {
        for j in 0..nz {
            let t = TAU * (i as f64 + rng.random::<f64>()) / nt as f64;
            let z = height * (j as f64 + rng.random::<f64>()) / nz as f64;
            let n = Vec3::new(t.cos(), t.sin(), 0.0);
            out.push(Sample {
                point: n * radius + Vec3::z() * z,
                normal: n,
            });
        }
    }
    let nc = ((2.0 * radius / spacing).ceil() as usize).max(1);
    for i in 0..nc {
        for j in 0..nc {
            let x = -radius + 2.0 * radius * (i as f64 + rng.random::<f64>()) / nc as f64;
            let y = -radius + 2.0 * radius * (j as f64 + rng.random::<f64>()) / nc as f64;
            if x * x + y * y <= radius * radius {
                out.push(Sample {
                    point: Vec3::new(x, y, height),
                    normal: Vec3::z(),
                });
            }
        }
    }
    out
}

fn object_samples(o: &ObjectSpec, spacing: f64, rng: &mut impl Rng) -> Vec<Sample> {
    let local = match o.shape {
        Shape::Box => sample_box(&o.dimensions, spacing, rng),
        Shape::Cylinder => sample_cylinder(o.dimensions[0], o.dimensions[1], spacing, rng),
    };
    local
        .into_iter()
        .map(|s| Sample {
            point: o.pose.transform_point(&s.point),
            normal: o.pose.rotate(&s.normal),
        })
        .collect()
}

/// Horizontal footprint radius of an object (circumscribed circle).
fn footprint_radius(o: &ObjectSpec) -> f64 {
    match o.shape {
        Shape::Box => (o.dimensions[0].powi(2) + o.dimensions[1].powi(2)).sqrt() / 2.0,
        Shape::Cylinder => o.dimensions[0],
    }
}

fn inside_footprint(o: &ObjectSpec, p: &Vec3, inflate: f64) -> bool {
    let local = o.pose.inverse().transform_point(p);
    match o.shape {
        Shape::Box => local.x.abs() <= o.dimensions[0] / 2.0 + inflate && local.y.abs() <= o.dimensions[1] / 2.0 + inflate,
        Shape::Cylinder => local.xy().norm() <= o.dimensions[0] + inflate,
    }
}

/// Builds a scene from `recipe`. Identical recipes give identical scenes.
pub fn generate_scene(recipe: &SceneRecipe) -> Result<SceneModel> {
    recipe.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let camera = Vec3::from(recipe.camera_position);

    let target = &recipe.objects[0];
    let mut object_pts: Vec<Vec3> = object_samples(target, recipe.surface_spacing, &mut rng)
        .into_iter()
        .filter(|s| s.normal.dot(&(camera - s.point)) > 0.0)
        .map(|s| s.point)
        .collect();
    if object_pts.is_empty() {
        return Err(Error::InvalidRecipe("target object is not visible from the camera".into()));
    }

    let mut env_pts = Vec::new();
    for o in &recipe.objects[1..] {
        env_pts.extend(object_samples(o, recipe.surface_spacing, &mut rng).into_iter().map(|s| s.point));
    }

    let t = &recipe.table;
    let (nx, ny) = (
        ((t.extent[0] / recipe.table_spacing).ceil() as usize).max(1),
        ((t.extent[1] / recipe.table_spacing).ceil() as usize).max(1),
    );
    for i in 0..nx {
        for j in 0..ny {
            let p = Vec3::new(
                t.center[0] - t.extent[0] / 2.0 + t.extent[0] * (i as f64 + rng.random::<f64>()) / nx as f64,
                t.center[1] - t.extent[1] / 2.0 + t.extent[1] * (j as f64 + rng.random::<f64>()) / ny as f64,
                t.height,
            );
            if !recipe.objects.iter().any(|o| inside_footprint(o, &p, 0.0)) {
                env_pts.push(p);
            }
        }
    }

    let clutter = (recipe.clutter_density * t.extent[0] * t.extent[1]).round() as usize;
    for _ in 0..clutter {
        let p = Vec3::new(
            t.center[0] + t.extent[0] * (rng.random::<f64>() - 0.5),
            t.center[1] + t.extent[1] * (rng.random::<f64>() - 0.5),
            t.height + CLUTTER_MAX_HEIGHT * rng.random::<f64>(),
        );
        let near_object = recipe
            .objects
            .iter()
            .any(|o| (p.xy() - o.pose.position.xy()).norm() <= footprint_radius(o) + CLUTTER_KEEPOUT);
        if !near_object {
            env_pts.push(p);
        }
    }

    if recipe.sensor_noise_sigma > 0.0 {
        let noise = Normal::new(0.0, recipe.sensor_noise_sigma).map_err(|e| Error::InvalidRecipe(e.to_string()))?;
        for p in object_pts.iter_mut().chain(env_pts.iter_mut()) {
            *p += Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
        }
    }

    let tags = |n: usize| vec![SourceTag::Synthetic; n];
    let (no, ne) = (object_pts.len(), env_pts.len());
    Ok(SceneModel {
        object_cloud: PointCloud::with_sources(object_pts, tags(no))?,
        environment_cloud: PointCloud::with_sources(env_pts, tags(ne))?,
        object_label: Some(target.label.clone()),
        gripper: recipe.gripper.clone(),
        base_pose: recipe.base_pose,
        workspace: recipe.workspace,
    })
}
