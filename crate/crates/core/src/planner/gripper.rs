use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Sphere in the end-effector frame used for collision lookups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionProbe {
    pub center: [f64; 3],
    pub radius: f64,
}

impl CollisionProbe {
    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }
}

/// Parallel-jaw gripper.
///
/// End-effector frame: origin at the back of the palm, X points forward
/// along the approach, Y is the closing axis and Z runs along the finger
/// plates. The palm occupies `0 <= x <= palm_depth`, the fingers extend from
/// the palm front by `finger_length` at `y = ±(max_opening + finger_thickness) / 2`
/// and span `|z| <= finger_width / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GripperSpec {
    pub max_opening: f64,
    pub finger_length: f64,
    pub finger_thickness: f64,
    /// Extent of the finger plates along Z.
    pub finger_width: f64,
    pub palm_width: f64,
    pub palm_depth: f64,
    pub collision_probes: Vec<CollisionProbe>,
}

pub const DEFAULT_FINGER_WIDTH: f64 = 0.02;

impl Default for GripperSpec {
    fn default() -> Self {
        Self::parallel_jaw(0.08, 0.05, 0.01, 0.10, 0.04)
    }
}

impl GripperSpec {
    /// Gripper with probes generated from its dimensions.
    pub fn parallel_jaw(max_opening: f64, finger_length: f64, finger_thickness: f64, palm_width: f64, palm_depth: f64) -> Self {
        let mut g = Self {
            max_opening,
            finger_length,
            finger_thickness,
            finger_width: DEFAULT_FINGER_WIDTH,
            palm_width,
            palm_depth,
            collision_probes: Vec::new(),
        };
        g.collision_probes = g.generate_probes();
        g
    }

    /// Same gripper with a different finger plate width; probes are regenerated.
    pub fn with_finger_width(mut self, finger_width: f64) -> Self {
        self.finger_width = finger_width;
        self.collision_probes = self.generate_probes();
        self
    }

    /// Finger plates are tiled with spheres of the finger thickness spaced by
    /// their radius; the palm is a grid of spheres kept inside the palm rectangle.
    pub fn generate_probes(&self) -> Vec<CollisionProbe> {
        let mut probes = Vec::new();
        let r = self.finger_thickness / 2.0;
        let y = (self.max_opening + self.finger_thickness) / 2.0;
        let x0 = self.palm_depth + r;
        let x1 = (self.palm_depth + self.finger_length - r).max(x0);
        let nx = (((x1 - x0) / r).ceil() as usize).max(1);
        let z1 = (self.finger_width / 2.0 - r).max(0.0);
        let nz = ((2.0 * z1 / r).ceil() as usize).max(1);
        for side in [-1.0, 1.0] {
            for i in 0..=nx {
                let x = x0 + (x1 - x0) * i as f64 / nx as f64;
                for k in 0..=nz {
                    let z = if z1 > 0.0 { -z1 + 2.0 * z1 * k as f64 / nz as f64 } else { 0.0 };
                    probes.push(CollisionProbe {
                        center: [x, side * y, z],
                        radius: r,
                    });
                    if z1 == 0.0 {
                        break;
                    }
                }
            }
        }
        let rp = self.palm_depth.min(self.palm_width) / 4.0;
        let nx = (((self.palm_depth - 2.0 * rp) / rp).ceil() as usize).max(1);
        let ny = (((self.palm_width - 2.0 * rp) / rp).ceil() as usize).max(1);
        for i in 0..=nx {
            let x = rp + (self.palm_depth - 2.0 * rp) * i as f64 / nx as f64;
            for j in 0..=ny {
                let y = -self.palm_width / 2.0 + rp + (self.palm_width - 2.0 * rp) * j as f64 / ny as f64;
                probes.push(CollisionProbe {
                    center: [x, y, 0.0],
                    radius: rp,
                });
            }
        }
        probes
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.max_opening,
            self.finger_length,
            self.finger_thickness,
            self.finger_width,
            self.palm_width,
            self.palm_depth,
        ];
        if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig("gripper dimensions must be positive".into()));
        }
        if self.collision_probes.len() < 8 {
            return Err(Error::InvalidConfig(format!(
                "gripper needs at least 8 collision probes, got {}",
                self.collision_probes.len()
            )));
        }
        if self.collision_probes.iter().any(|p| !(p.radius > 0.0)) {
            return Err(Error::InvalidConfig("probe radii must be positive".into()));
        }
        Ok(())
    }
}

/// File form: probes are omitted when they match the generated set.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GripperRecord {
    max_opening: f64,
    finger_length: f64,
    finger_thickness: f64,
    #[serde(default = "default_finger_width")]
    finger_width: f64,
    palm_width: f64,
    palm_depth: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    collision_probes: Option<Vec<CollisionProbe>>,
}

fn default_finger_width() -> f64 {
    DEFAULT_FINGER_WIDTH
}

impl Serialize for GripperSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let generated = self.generate_probes() == self.collision_probes;
        GripperRecord {
            max_opening: self.max_opening,
            finger_length: self.finger_length,
            finger_thickness: self.finger_thickness,
            finger_width: self.finger_width,
            palm_width: self.palm_width,
            palm_depth: self.palm_depth,
            collision_probes: (!generated).then(|| self.collision_probes.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GripperSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GripperRecord::deserialize(d)?;
        let mut g = GripperSpec::parallel_jaw(r.max_opening, r.finger_length, r.finger_thickness, r.palm_width, r.palm_depth)
            .with_finger_width(r.finger_width);
        if let Some(p) = r.collision_probes {
            g.collision_probes = p;
        }
        Ok(g)
    }
}
