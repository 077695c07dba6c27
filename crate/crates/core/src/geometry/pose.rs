use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Rigid transform: rotation followed by translation.
///
/// Orientation is renormalized after every composition so that long chains
/// of products do not drift off the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation: renormalize(orientation),
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z), UnitQuaternion::identity())
    }

    /// Rotation of `angle` radians about the world Z axis, placed at `position`.
    pub fn from_yaw(position: Vec3, yaw: f64) -> Self {
        Self::new(position, UnitQuaternion::from_axis_angle(&Vec3::z_axis(), yaw))
    }

    /// Builds a pose from orthonormal frame axes expressed in the parent frame.
    pub fn from_axes(position: Vec3, x: Vec3, y: Vec3, z: Vec3) -> Self {
        let m = nalgebra::Matrix3::from_columns(&[x, y, z]);
        let rot = nalgebra::Rotation3::from_matrix_unchecked(m);
        Self::new(position, UnitQuaternion::from_rotation_matrix(&rot))
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.position + self.orientation * other.position,
            self.orientation * other.orientation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-(inv * self.position), inv)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.orientation * p + self.position
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.orientation * v
    }

    pub fn x_axis(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    pub fn y_axis(&self) -> Vec3 {
        self.orientation * Vec3::y()
    }

    pub fn z_axis(&self) -> Vec3 {
        self.orientation * Vec3::z()
    }

    /// Heading of the local X axis projected on the horizontal plane.
    pub fn yaw(&self) -> f64 {
        let x = self.x_axis();
        x.y.atan2(x.x)
    }

    /// Rotation angle in radians between the two orientations.
    pub fn angle_to(&self, other: &Pose) -> f64 {
        self.orientation.angle_to(&other.orientation)
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.position - other.position).norm()
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    /// Quaternion as `[w, x, y, z]`.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

impl From<Isometry3<f64>> for Pose {
    fn from(iso: Isometry3<f64>) -> Self {
        Pose::new(iso.translation.vector, iso.rotation)
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_normalize(q.into_inner())
}

/// Serialized form of a pose: position in meters, orientation as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub position: [f64; 3],
    #[serde(default = "identity_wxyz")]
    pub orientation: [f64; 4],
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl From<&Pose> for PoseRecord {
    fn from(p: &Pose) -> Self {
        Self {
            position: [p.position.x, p.position.y, p.position.z],
            orientation: p.quaternion_wxyz(),
        }
    }
}

impl From<PoseRecord> for Pose {
    fn from(r: PoseRecord) -> Self {
        let [w, x, y, z] = r.orientation;
        Pose::new(
            Vec3::new(r.position[0], r.position[1], r.position[2]),
            UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z)),
        )
    }
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PoseRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PoseRecord::deserialize(d).map(Pose::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub(crate) fn random_pose(rng: &mut impl Rng) -> Pose {
        let axis = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let axis = nalgebra::Unit::new_normalize(axis + Vec3::new(1e-3, 0.0, 0.0));
        Pose::new(
            Vec3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ),
            UnitQuaternion::from_axis_angle(&axis, rng.random_range(-PI..PI)),
        )
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_pose(&mut rng);
        let q = Pose::identity().compose(&p);
        assert!((q.position - p.position).norm() < 1e-12);
        assert!(q.angle_to(&p) < 1e-9);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = random_pose(&mut rng);
            let id = p.compose(&p.inverse());
            assert!(id.position.norm() < 1e-9);
            assert!(id.angle_to(&Pose::identity()) < 1e-9);
        }
    }

    #[test]
    fn translations_add() {
        let p = Pose::from_translation(1.0, 0.0, 0.0).compose(&Pose::from_translation(0.0, 2.0, 0.0));
        assert_eq!(p.position, Vec3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn norm_does_not_drift_over_long_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = Pose::identity();
        for _ in 0..10_000 {
            acc = acc.compose(&random_pose(&mut rng));
            assert!((acc.orientation.quaternion().norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn record_roundtrip() {
        let p = Pose::from_yaw(Vec3::new(0.1, 0.2, 0.3), 0.7);
        let back: Pose = PoseRecord::from(&p).into();
        assert!(back.distance_to(&p) < 1e-15);
        assert!(back.angle_to(&p) < 1e-12);
    }
}
