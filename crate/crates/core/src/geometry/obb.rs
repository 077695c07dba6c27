use nalgebra::{Matrix2, Matrix3, Rotation3, SymmetricEigen, UnitQuaternion, Vector2};

use super::{PointCloud, Pose, Vec3};
use crate::error::{Error, Result};

/// Slack used when testing point containment against a fitted box.
pub const FIT_TOLERANCE: f64 = 1e-6;

/// Box with arbitrary orientation. Axis 0 carries the largest extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBoundingBox {
    pub center: Vec3,
    pub rotation: UnitQuaternion<f64>,
    pub half_extents: Vec3,
}

impl OrientedBoundingBox {
    /// Builds a box and brings it into canonical form (descending extents,
    /// right-handed axes, `w >= 0` quaternion).
    pub fn new(center: Vec3, rotation: UnitQuaternion<f64>, half_extents: Vec3) -> Self {
        let m = rotation.to_rotation_matrix().into_inner();
        canonicalize(center, [m.column(0).into(), m.column(1).into(), m.column(2).into()], half_extents)
    }

    pub fn axis(&self, i: usize) -> Vec3 {
        self.rotation * Vec3::ith(i, 1.0)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.center, self.rotation)
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    pub fn max_half_extent(&self) -> f64 {
        self.half_extents.max()
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let local = Vec3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 } * self.half_extents.x,
                if i & 2 == 0 { -1.0 } else { 1.0 } * self.half_extents.y,
                if i & 4 == 0 { -1.0 } else { 1.0 } * self.half_extents.z,
            );
            *c = self.center + self.rotation * local;
        }
        out
    }

    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        let local = self.rotation.inverse() * (p - self.center);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] + tol)
    }

    /// Same box expressed in another frame: `pose` maps this box's frame into the new one.
    pub fn transformed(&self, pose: &Pose) -> Self {
        OrientedBoundingBox::new(
            pose.transform_point(&self.center),
            pose.orientation * self.rotation,
            self.half_extents,
        )
    }
}

/// Oriented box fit. With `gravity_aligned`, one axis is pinned to world Z and
/// the horizontal axes come from the planar spread of the points; otherwise
/// the orientation starts from PCA and is refined to reduce the volume.
pub fn fit_obb(cloud: &PointCloud, gravity_aligned: bool) -> Result<OrientedBoundingBox> {
    let pts = cloud.points();
    let needed = if gravity_aligned { 3 } else { 4 };
    if pts.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: pts.len(),
        });
    }
    if gravity_aligned {
        fit_gravity_aligned(pts)
    } else {
        fit_free(pts)
    }
}

fn fit_free(pts: &[Vec3]) -> Result<OrientedBoundingBox> {
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let mut cov = Matrix3::zeros();
    for p in pts {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= 0.0 || min <= max * 1e-12 {
        return Err(Error::DegenerateCloud("covariance is rank deficient".into()));
    }
    let e0 = eig.eigenvectors.column(0).into_owned();
    let e1 = eig.eigenvectors.column(1).into_owned();
    let pca = [e0, e1, e0.cross(&e1).normalize()];

    // Start from the PCA frame and from a minimum-area rectangle around each
    // PCA axis, then polish the smallest by local rotation search.
    let mut best = pca;
    let mut best_vol = box_volume(pts, &pca);
    for up in pca {
        let axes = planar_rect_axes(pts, &up);
        let vol = box_volume(pts, &axes);
        if vol < best_vol * (1.0 - 1e-9) {
            best = axes;
            best_vol = vol;
        }
    }
    box_from_axes(pts, refine_axes(pts, best, best_vol))
}

/// Axes `[a, b, up]` where `a, b` span the minimum-area rectangle of the
/// points projected onto the plane normal to `up`.
fn planar_rect_axes(pts: &[Vec3], up: &Vec3) -> [Vec3; 3] {
    let u = up.normalize();
    let seed = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - u * u.dot(&seed)).normalize();
    let e2 = u.cross(&e1);
    let flat: Vec<Vector2<f64>> = pts.iter().map(|p| Vector2::new(e1.dot(p), e2.dot(p))).collect();
    let mut best_dir = Vector2::x();
    let mut best_area = rect_area(&flat, &best_dir);
    for edge in hull_edge_directions(&flat) {
        let area = rect_area(&flat, &edge);
        if area < best_area * (1.0 - 1e-9) {
            best_area = area;
            best_dir = edge;
        }
    }
    let d = best_dir.normalize();
    let a = e1 * d.x + e2 * d.y;
    [a, u.cross(&a), u]
}

fn box_volume(pts: &[Vec3], axes: &[Vec3; 3]) -> f64 {
    let mut lo = [f64::MAX; 3];
    let mut hi = [f64::MIN; 3];
    for p in pts {
        for i in 0..3 {
            let v = axes[i].dot(p);
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    (0..3).map(|i| hi[i] - lo[i]).product()
}

/// Coordinate descent over small rotations about the current box axes with a
/// shrinking step; accepts only strict volume decreases.
fn refine_axes(pts: &[Vec3], mut axes: [Vec3; 3], mut vol: f64) -> [Vec3; 3] {
    let mut step = 8f64.to_radians();
    while step > 1e-4f64.to_radians() {
        let mut improved = true;
        while improved {
            improved = false;
            for k in 0..3 {
                for sign in [1.0, -1.0] {
                    let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axes[k]), sign * step);
                    let cand = axes.map(|a| rot * a);
                    let v = box_volume(pts, &cand);
                    if v < vol * (1.0 - 1e-12) {
                        axes = cand;
                        vol = v;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    axes
}

fn fit_gravity_aligned(pts: &[Vec3]) -> Result<OrientedBoundingBox> {
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Vector2::zeros(), |a, p| a + p.xy()) / n;
    let mut cov = Matrix2::zeros();
    for p in pts {
        let d = p.xy() - mean;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let (max, min) = (eig.eigenvalues.max(), eig.eigenvalues.min());
    if max <= 0.0 || min <= max * 1e-12 {
        return Err(Error::DegenerateCloud("horizontal spread is rank deficient".into()));
    }
    let major = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let dir = eig.eigenvectors.column(major).into_owned();

    // PCA axes are unstable when the planar spread is close to isotropic;
    // the minimum-area rectangle over hull edges is kept if it is tighter.
    let flat: Vec<Vector2<f64>> = pts.iter().map(|p| p.xy()).collect();
    let mut best_dir = dir;
    let mut best_area = rect_area(&flat, &dir);
    for edge in hull_edge_directions(&flat) {
        let area = rect_area(&flat, &edge);
        if area < best_area * (1.0 - 1e-9) {
            best_area = area;
            best_dir = edge;
        }
    }
    let a = Vec3::new(best_dir.x, best_dir.y, 0.0).normalize();
    let b = Vec3::z().cross(&a);
    box_from_axes(pts, [a, b, Vec3::z()])
}

fn rect_area(pts: &[Vector2<f64>], dir: &Vector2<f64>) -> f64 {
    let d = dir.normalize();
    let o = Vector2::new(-d.y, d.x);
    let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        let a = d.dot(p);
        let b = o.dot(p);
        lo_a = lo_a.min(a);
        hi_a = hi_a.max(a);
        lo_b = lo_b.min(b);
        hi_b = hi_b.max(b);
    }
    (hi_a - lo_a) * (hi_b - lo_b)
}

/// Edge directions of the 2D convex hull (monotone chain).
fn hull_edge_directions(pts: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return Vec::new();
    }
    let cross = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut hull: Vec<Vector2<f64>> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for q in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(*q);
        }
        hull.pop();
    }
    (0..hull.len())
        .map(|i| hull[(i + 1) % hull.len()] - hull[i])
        .filter(|e| e.norm() > 0.0)
        .collect()
}

fn box_from_axes(pts: &[Vec3], axes: [Vec3; 3]) -> Result<OrientedBoundingBox> {
    let mut lo = Vec3::repeat(f64::MAX);
    let mut hi = Vec3::repeat(f64::MIN);
    for p in pts {
        for i in 0..3 {
            let v = axes[i].dot(p);
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let half = (hi - lo) / 2.0;
    if half.min() <= 0.0 {
        return Err(Error::DegenerateCloud("zero extent along a box axis".into()));
    }
    let mid = (hi + lo) / 2.0;
    let center = axes[0] * mid[0] + axes[1] * mid[1] + axes[2] * mid[2];
    Ok(canonicalize(center, axes, half))
}

fn canonicalize(center: Vec3, axes: [Vec3; 3], half: Vec3) -> OrientedBoundingBox {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| half[b].total_cmp(&half[a]));
    let fix_sign = |v: Vec3| {
        let i = v.iamax();
        if v[i] < 0.0 {
            -v
        } else {
            v
        }
    };
    let a0 = fix_sign(axes[order[0]]).normalize();
    let a1 = fix_sign(axes[order[1]]);
    let a1 = (a1 - a0 * a0.dot(&a1)).normalize();
    let a2 = a0.cross(&a1);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[a0, a1, a2]));
    let mut q = UnitQuaternion::from_rotation_matrix(&rot).into_inner();
    if q.w < 0.0 || (q.w == 0.0 && first_nonzero_negative(&q.vector().into_owned())) {
        q = -q;
    }
    OrientedBoundingBox {
        center,
        rotation: UnitQuaternion::new_normalize(q),
        half_extents: Vec3::new(half[order[0]], half[order[1]], half[order[2]]),
    }
}

fn first_nonzero_negative(v: &Vec3) -> bool {
    v.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn corners(ext: Vec3) -> PointCloud {
        let h = ext / 2.0;
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            ));
        }
        PointCloud::new(pts).unwrap()
    }

    #[test]
    fn box_corners_recover_extents() {
        for gravity in [false, true] {
            let obb = fit_obb(&corners(Vec3::new(0.2, 0.1, 0.05)), gravity).unwrap();
            assert!(obb.center.norm() < 1e-12);
            assert!((obb.half_extents - Vec3::new(0.1, 0.05, 0.025)).norm() < 1e-12);
        }
    }

    #[test]
    fn too_few_points() {
        let c = PointCloud::new(vec![Vec3::zeros()]).unwrap();
        assert!(matches!(fit_obb(&c, false), Err(Error::TooFewPoints { .. })));
        assert!(matches!(fit_obb(&c, true), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn coplanar_points_are_degenerate() {
        let c = PointCloud::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(fit_obb(&c, false), Err(Error::DegenerateCloud(_))));
        assert!(matches!(fit_obb(&c, true), Err(Error::DegenerateCloud(_))));
    }

    #[test]
    fn canonical_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Vec3> = (0..200)
            .map(|_| Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.1), rng.random_range(-0.2..0.2)))
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        for gravity in [false, true] {
            let obb = fit_obb(&cloud, gravity).unwrap();
            let h = obb.half_extents;
            assert!(h.x >= h.y && h.y >= h.z);
            assert!(obb.rotation.quaternion().w >= 0.0);
            let m = obb.rotation.to_rotation_matrix();
            assert!((m.matrix().determinant() - 1.0).abs() < 1e-12);
            for p in cloud.points() {
                assert!(obb.contains(p, FIT_TOLERANCE));
            }
        }
    }

    #[test]
    fn gravity_mode_keeps_vertical_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rot = UnitQuaternion::from_axis_angle(&Vec3::z_axis(), 0.4);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| rot * Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.05..0.05), rng.random_range(0.0..0.1)))
            .collect();
        let obb = fit_obb(&PointCloud::new(pts).unwrap(), true).unwrap();
        let vertical = (0..3).filter(|&i| obb.axis(i).z.abs() > 1.0 - 1e-12).count();
        assert_eq!(vertical, 1);
    }
}
