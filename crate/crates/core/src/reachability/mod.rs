//! Voxelized reachability map over approach-direction bins, and base alignment.
//!
//! The arm is abstracted as a yaw joint followed by a planar chain of pitch
//! joints on a vertical lift. Monte-Carlo forward kinematics marks, for every
//! sample, the voxel holding the tool tip and the direction bin nearest to the
//! last link's pointing direction.

mod align;

pub use align::{align_base, base_candidates, heading_error, AlignParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};

/// Minimum sample count accepted by [`build_reachability_map`].
pub const MIN_SAMPLES: usize = 10_000;
/// Fixed shard count for sampling; keeps results independent of thread count.
const SHARDS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmModel {
    /// Arm base in the robot base frame.
    pub base_offset: Pose,
    pub link_lengths: Vec<f64>,
    /// `[min, max]` radians: the base yaw joint first, then one pitch joint per link.
    pub joint_limits: Vec<[f64; 2]>,
    /// Torso lift travel along the robot base Z axis (meters).
    pub vertical_lift_range: f64,
}

impl Default for ArmModel {
    fn default() -> Self {
        Self {
            base_offset: Pose::from_translation(0.05, 0.0, 0.70),
            link_lengths: vec![0.35, 0.30, 0.20],
            joint_limits: vec![[-2.0, 2.0], [-1.6, 1.6], [-2.5, 2.5], [-2.0, 2.0]],
            vertical_lift_range: 0.35,
        }
    }
}

impl ArmModel {
    pub fn validate(&self) -> Result<()> {
        if self.link_lengths.is_empty() || self.link_lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidArm("link lengths must be positive".into()));
        }
        if self.joint_limits.len() != self.link_lengths.len() + 1 {
            return Err(Error::InvalidArm(format!(
                "expected {} joint limits (yaw + one per link), got {}",
                self.link_lengths.len() + 1,
                self.joint_limits.len()
            )));
        }
        if self.joint_limits.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(Error::InvalidArm("joint limits need min < max".into()));
        }
        if !(self.vertical_lift_range >= 0.0) {
            return Err(Error::InvalidArm("lift range must be non-negative".into()));
        }
        Ok(())
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn dof(&self) -> usize {
        self.joint_limits.len()
    }

    /// Tool tip position and pointing direction in the robot base frame.
    pub fn forward(&self, joints: &[f64], lift: f64) -> (Vec3, Vec3) {
        let yaw = joints[0];
        let (sy, cy) = yaw.sin_cos();
        let mut pitch = 0.0;
        let mut p = Vec3::zeros();
        let mut dir = Vec3::x();
        for (len, q) in self.link_lengths.iter().zip(&joints[1..]) {
            pitch += q;
            let (sp, cp) = pitch.sin_cos();
            dir = Vec3::new(cp * cy, cp * sy, sp);
            p += dir * *len;
        }
        let tip = self.base_offset.transform_point(&p) + Vec3::z() * lift;
        (tip, self.base_offset.rotate(&dir))
    }

    fn sample(&self, rng: &mut impl Rng, joints: &mut [f64]) -> (Vec3, Vec3) {
        for (q, [lo, hi]) in joints.iter_mut().zip(&self.joint_limits) {
            *q = rng.random_range(*lo..*hi);
        }
        let lift = if self.vertical_lift_range > 0.0 {
            rng.random_range(0.0..self.vertical_lift_range)
        } else {
            0.0
        };
        self.forward(joints, lift)
    }

    /// Distance from `p` to the segment swept by the arm base over the lift range.
    pub fn distance_to_base(&self, p: &Vec3) -> f64 {
        let b = self.base_offset.position;
        let z = (p.z - b.z).clamp(0.0, self.vertical_lift_range);
        (p - (b + Vec3::z() * z)).norm()
    }
}

/// Raw forward-kinematics samples in the exact order the map builder draws them.
pub fn fk_samples(arm: &ArmModel, samples: usize, seed: u64) -> Vec<(Vec3, Vec3)> {
    (0..SHARDS)
        .flat_map(|s| {
            let mut rng = shard_rng(seed, s);
            let mut joints = vec![0.0; arm.dof()];
            (0..shard_len(samples, s))
                .map(|_| arm.sample(&mut rng, &mut joints))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn shard_len(samples: usize, shard: u64) -> usize {
    let base = samples / SHARDS as usize;
    base + usize::from((shard as usize) < samples % SHARDS as usize)
}

/// Unit directions the map distinguishes between.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBins {
    dirs: Vec<Vec3>,
}

impl DirectionBins {
    /// `k = 26` gives the face, edge and corner neighbors of a cube; other
    /// counts (up to 32) use a Fibonacci sphere.
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > 32 {
            return Err(Error::OutOfRange(format!("direction bins must be in 1..=32, got {k}")));
        }
        let dirs = if k == 26 {
            let mut v = Vec::with_capacity(26);
            for i in -1i32..=1 {
                for j in -1i32..=1 {
                    for l in -1i32..=1 {
                        if (i, j, l) != (0, 0, 0) {
                            v.push(Vec3::new(i as f64, j as f64, l as f64).normalize());
                        }
                    }
                }
            }
            v
        } else {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = if k == 1 { 1.0 } else { 1.0 - 2.0 * i as f64 / (k - 1) as f64 };
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * i as f64;
                    Vec3::new(r * t.cos(), r * t.sin(), z)
                })
                .collect()
        };
        Ok(Self { dirs })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn direction(&self, i: usize) -> Vec3 {
        self.dirs[i]
    }

    /// Bin with the largest cosine to `v`; ties go to the lower index.
    pub fn nearest(&self, v: &Vec3) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, d) in self.dirs.iter().enumerate() {
            let c = d.dot(v);
            if c > best.1 {
                best = (i, c);
            }
        }
        best.0
    }
}

/// Axis-aligned box in the robot base frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for WorkspaceBounds {
    fn default() -> Self {
        Self {
            min: [-0.2, -0.9, 0.3],
            max: [1.1, 0.9, 1.7],
        }
    }
}

impl WorkspaceBounds {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        let b = Self { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if (0..3).any(|i| !(self.min[i] < self.max[i])) {
            return Err(Error::OutOfRange("workspace bounds need min < max on every axis".into()));
        }
        Ok(())
    }

    /// Distance to the nearest boundary face; negative outside the box.
    pub fn margin(&self, p: &Vec3) -> f64 {
        (0..3)
            .map(|i| (p[i] - self.min[i]).min(self.max[i] - p[i]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.margin(p) >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityMap {
    voxel_size: f64,
    origin: Vec3,
    dims: [usize; 3],
    bins: DirectionBins,
    cells: Vec<u32>,
}

impl ReachabilityMap {
    /// Assembles a map from stored parts (used by the file reader).
    pub fn from_parts(voxel_size: f64, origin: Vec3, dims: [usize; 3], direction_bins: usize, cells: Vec<u32>) -> Result<Self> {
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::InvalidResolution(voxel_size));
        }
        if cells.len() != dims.iter().product::<usize>() {
            return Err(Error::OutOfRange("cell count does not match grid dimensions".into()));
        }
        Ok(Self {
            voxel_size,
            origin,
            dims,
            bins: DirectionBins::new(direction_bins)?,
            cells,
        })
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Minimum corner of the grid.
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn bins(&self) -> &DirectionBins {
        &self.bins
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn bounds(&self) -> WorkspaceBounds {
        let max = self.origin + Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64) * self.voxel_size;
        WorkspaceBounds {
            min: self.origin.into(),
            max: max.into(),
        }
    }

    pub fn voxel_index(&self, p: &Vec3) -> Option<usize> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.voxel_size).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            idx[a] = f as usize;
        }
        Some((idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0])
    }

    /// Axis-aligned extent `(min, max)` of voxel `index`.
    pub fn voxel_box(&self, index: usize) -> (Vec3, Vec3) {
        let x = index % self.dims[0];
        let y = (index / self.dims[0]) % self.dims[1];
        let z = index / (self.dims[0] * self.dims[1]);
        let lo = self.origin + Vec3::new(x as f64, y as f64, z as f64) * self.voxel_size;
        (lo, lo + Vec3::repeat(self.voxel_size))
    }

    /// Bitmask of reachable direction bins at `p` (zero outside the map).
    pub fn reachable_bins(&self, p: &Vec3) -> u32 {
        self.voxel_index(p).map_or(0, |i| self.cells[i])
    }

    pub fn reachable_bin_count(&self, p: &Vec3) -> u32 {
        self.reachable_bins(p).count_ones()
    }

    /// Bin count trilinearly interpolated between voxel centers, so that
    /// nearby positions score alike regardless of how they fall on the grid.
    pub fn interpolated_bin_count(&self, p: &Vec3) -> f64 {
        let g = (p - self.origin) / self.voxel_size - Vec3::repeat(0.5);
        let base = g.map(f64::floor);
        let frac = g - base;
        let mut total = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut q = Vec3::zeros();
            for a in 0..3 {
                let hi = corner >> a & 1 == 1;
                w *= if hi { frac[a] } else { 1.0 - frac[a] };
                q[a] = self.origin[a] + (base[a] + if hi { 1.5 } else { 0.5 }) * self.voxel_size;
            }
            if w > 0.0 {
                total += w * self.reachable_bin_count(&q) as f64;
            }
        }
        total
    }

    pub fn reachable_fraction(&self) -> f64 {
        self.cells.iter().filter(|c| **c != 0).count() as f64 / self.cells.len() as f64
    }
}

/// True iff the voxel at `pose` (robot base frame) has the bin matching the
/// pose's approach direction (its local X axis).
pub fn is_reachable(map: &ReachabilityMap, pose: &Pose) -> bool {
    let bins = map.reachable_bins(&pose.position);
    bins != 0 && bins & (1 << map.bins.nearest(&pose.x_axis())) != 0
}

/// Monte-Carlo reachability map. Deterministic for a fixed seed regardless
/// of how many worker threads run the shards.
pub fn build_reachability_map(
    arm: &ArmModel,
    resolution: f64,
    direction_bins: usize,
    samples: usize,
    seed: u64,
) -> Result<ReachabilityMap> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::InvalidResolution(resolution));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::OutOfRange(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    arm.validate()?;
    let bins = DirectionBins::new(direction_bins)?;

    let reach = arm.reach();
    let b = arm.base_offset.position;
    let lo = Vec3::new(b.x - reach, b.y - reach, b.z - reach);
    let hi = Vec3::new(b.x + reach, b.y + reach, b.z + arm.vertical_lift_range + reach);
    let origin = lo.map(|v| (v / resolution).floor() * resolution);
    let dims = [0, 1, 2].map(|a| (((hi[a] - origin[a]) / resolution).ceil() as usize).max(1));
    let mut map = ReachabilityMap {
        voxel_size: resolution,
        origin,
        dims,
        bins,
        cells: vec![0; dims.iter().product()],
    };

    let ncells = map.cells.len();
    let cells = (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let mut local = vec![0u32; ncells];
            let mut rng = shard_rng(seed, s);
            let mut joints = vec![0.0; arm.dof()];
            for _ in 0..shard_len(samples, s) {
                let (tip, dir) = arm.sample(&mut rng, &mut joints);
                debug_assert!(arm.distance_to_base(&tip) <= reach + 1e-9);
                if let Some(v) = map.voxel_index(&tip) {
                    local[v] |= 1 << map.bins.nearest(&dir);
                }
            }
            local
        })
        .reduce(
            || vec![0u32; ncells],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x |= y);
                a
            },
        );
    map.cells = cells;
    Ok(map)
}

/// Heading (yaw) of the horizontal direction from `from` to `to`.
pub(crate) fn bearing(from: &Vec3, to: &Vec3) -> f64 {
    (to.y - from.y).atan2(to.x - from.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn planar_two_link() -> ArmModel {
        ArmModel {
            base_offset: Pose::identity(),
            link_lengths: vec![0.3, 0.3],
            joint_limits: vec![[-3.1, 3.1], [-1.5, 1.5], [-2.8, 2.8]],
            vertical_lift_range: 0.0,
        }
    }

    #[test]
    fn rejects_bad_resolution_and_arm() {
        let arm = ArmModel::default();
        assert!(matches!(build_reachability_map(&arm, 0.0, 26, 20_000, 1), Err(Error::InvalidResolution(_))));
        assert!(matches!(build_reachability_map(&arm, -0.1, 26, 20_000, 1), Err(Error::InvalidResolution(_))));
        let bad = ArmModel {
            link_lengths: vec![0.3, -0.1, 0.2],
            ..ArmModel::default()
        };
        assert!(matches!(build_reachability_map(&bad, 0.05, 26, 20_000, 1), Err(Error::InvalidArm(_))));
    }

    #[test]
    fn beyond_reach_is_unreachable() {
        let arm = ArmModel::default();
        let map = build_reachability_map(&arm, 0.05, 26, 100_000, 7).unwrap();
        let far = arm.base_offset.position + Vec3::new(arm.reach() + arm.vertical_lift_range + 1.0, 0.0, 0.0);
        assert_eq!(map.reachable_bins(&far), 0);
        assert!(!is_reachable(&map, &Pose::new(far, Default::default())));
        // No marked voxel lies beyond the maximum reach.
        for (i, c) in map.cells().iter().enumerate() {
            if *c != 0 {
                let (lo, hi) = map.voxel_box(i);
                let closest = arm.base_offset.position.zip_zip_map(&lo, &hi, |b, l, h| b.clamp(l, h));
                assert!(arm.distance_to_base(&closest) <= arm.reach() + arm.vertical_lift_range + 1e-9);
            }
        }
    }

    #[test]
    fn two_link_ik_target_is_marked() {
        // Analytic IK: a target at planar distance 0.4 needs an elbow angle
        // of acos((d^2 - 2 l^2) / (2 l^2)), well inside the limits.
        let arm = planar_two_link();
        let (l, d) = (0.3f64, 0.4f64);
        let elbow = ((d * d - 2.0 * l * l) / (2.0 * l * l)).acos();
        let shoulder = -elbow / 2.0;
        assert!(elbow.abs() < 2.8 && shoulder.abs() < 1.5);
        let target = Vec3::new(d, 0.0, 0.0);
        let (tip, _) = arm.forward(&[0.0, shoulder, elbow], 0.0);
        assert!((tip - target).norm() < 1e-12);
        let map = build_reachability_map(&arm, 0.05, 26, 1_000_000, 3).unwrap();
        assert_ne!(map.reachable_bins(&target), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let arm = ArmModel::default();
        let a = build_reachability_map(&arm, 0.05, 26, 50_000, 9).unwrap();
        let b = build_reachability_map(&arm, 0.05, 26, 50_000, 9).unwrap();
        assert_eq!(a, b);
        let c = build_reachability_map(&arm, 0.05, 26, 50_000, 10).unwrap();
        assert_ne!(a.cells(), c.cells());
    }

    #[test]
    fn reachable_fraction_is_stable_across_seeds() {
        let arm = ArmModel::default();
        let a = build_reachability_map(&arm, 0.05, 26, 1_000_000, 1).unwrap().reachable_fraction();
        let b = build_reachability_map(&arm, 0.05, 26, 1_000_000, 2).unwrap().reachable_fraction();
        assert!(((a - b) / a).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn lookup_agrees_with_raw_samples() {
        let arm = ArmModel::default();
        let (samples, seed) = (50_000, 4);
        let map = build_reachability_map(&arm, 0.05, 26, samples, seed).unwrap();
        let raw = fk_samples(&arm, samples, seed);
        let marked: HashSet<(usize, usize)> = raw
            .iter()
            .filter_map(|(p, d)| map.voxel_index(p).map(|v| (v, map.bins().nearest(d))))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut agree = 0;
        for k in 0..1000 {
            // Half the probes come from the sampler, half are random.
            let (p, d) = if k % 2 == 0 {
                raw[rng.random_range(0..raw.len())]
            } else {
                let p = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0));
                let d = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (p, d)
            };
            let rot = nalgebra::UnitQuaternion::rotation_between(&Vec3::x(), &d)
                .unwrap_or_else(|| nalgebra::UnitQuaternion::from_axis_angle(&Vec3::z_axis(), std::f64::consts::PI));
            let pose = Pose::new(p, rot);
            let expected = map
                .voxel_index(&p)
                .is_some_and(|v| marked.contains(&(v, map.bins().nearest(&pose.x_axis()))));
            if is_reachable(&map, &pose) == expected {
                agree += 1;
            }
        }
        assert!(agree >= 990, "agreement {agree}/1000");
    }

    #[test]
    fn workspace_margin_sign() {
        let w = WorkspaceBounds::new([0.0; 3], [1.0; 3]).unwrap();
        assert!((w.margin(&Vec3::new(0.5, 0.5, 0.2)) - 0.2).abs() < 1e-12);
        assert!(w.margin(&Vec3::new(1.5, 0.5, 0.5)) < 0.0);
        assert!(WorkspaceBounds::new([0.0; 3], [1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn cube_bins() {
        let bins = DirectionBins::new(26).unwrap();
        assert_eq!(bins.len(), 26);
        let down = bins.nearest(&-Vec3::z());
        assert!((bins.direction(down) + Vec3::z()).norm() < 1e-12);
        assert!(DirectionBins::new(33).is_err());
        assert_eq!(DirectionBins::new(8).unwrap().len(), 8);
    }
}
