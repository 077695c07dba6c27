//! Complete object models and simulated partial views for registration.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::Shape;
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

/// `n` points drawn uniformly by area over the closed surface of a shape,
/// with the origin at the center of its bottom face. Box dimensions are
/// `[sx, sy, sz]`, cylinder dimensions `[radius, height]`.
pub fn sample_model(shape: Shape, dimensions: &[f64], n: usize, seed: u64) -> Result<PointCloud> {
    let need = match shape {
        Shape::Box => 3,
        Shape::Cylinder => 2,
    };
    if dimensions.len() != need || dimensions.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidRecipe(format!("{shape:?} needs {need} positive dimensions")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = match shape {
        Shape::Box => {
            let d = Vec3::new(dimensions[0], dimensions[1], dimensions[2]);
            let areas = [d.y * d.z, d.x * d.z, d.x * d.y];
            let total: f64 = areas.iter().sum();
            (0..n)
                .map(|_| {
                    let mut pick = rng.random::<f64>() * total;
                    let mut axis = 2;
                    for (i, a) in areas.iter().enumerate() {
                        if pick < *a {
                            axis = i;
                            break;
                        }
                        pick -= a;
                    }
                    let mut p = Vec3::new(rng.random::<f64>() * d.x, rng.random::<f64>() * d.y, rng.random::<f64>() * d.z);
                    p[axis] = if rng.random::<bool>() { 0.0 } else { d[axis] };
                    p - Vec3::new(d.x / 2.0, d.y / 2.0, 0.0)
                })
                .collect()
        }
        Shape::Cylinder => {
            let (r, h) = (dimensions[0], dimensions[1]);
            let side = TAU * r * h;
            let cap = std::f64::consts::PI * r * r;
            (0..n)
                .map(|_| {
                    let t = TAU * rng.random::<f64>();
                    if rng.random::<f64>() * (side + 2.0 * cap) < side {
                        Vec3::new(r * t.cos(), r * t.sin(), h * rng.random::<f64>())
                    } else {
                        let rho = r * rng.random::<f64>().sqrt();
                        let z = if rng.random::<bool>() { 0.0 } else { h };
                        Vec3::new(rho * t.cos(), rho * t.sin(), z)
                    }
                })
                .collect()
        }
    };
    PointCloud::new(pts)
}

/// Keeps the `keep_fraction` of points that lie furthest along `toward_viewer`,
/// a crude stand-in for self-occlusion. Order is preserved.
pub fn partial_view(cloud: &PointCloud, toward_viewer: &Vec3, keep_fraction: f64) -> PointCloud {
    let n = cloud.len();
    let keep = ((n as f64 * keep_fraction.clamp(0.0, 1.0)).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let proj = |i: usize| cloud.points()[i].dot(toward_viewer);
    order.sort_by(|&a, &b| proj(b).total_cmp(&proj(a)).then(a.cmp(&b)));
    let mut kept = order[..keep].to_vec();
    kept.sort_unstable();
    PointCloud::new(kept.into_iter().map(|i| cloud.points()[i]).collect()).expect("finite input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fit_obb;

    #[test]
    fn box_model_spans_its_dimensions() {
        let m = sample_model(Shape::Box, &[0.1, 0.06, 0.04], 4000, 1).unwrap();
        let b = fit_obb(&m, true).unwrap();
        let mut h: Vec<f64> = b.half_extents.iter().copied().collect();
        h.sort_by(f64::total_cmp);
        assert!((h[0] - 0.02).abs() < 1e-3 && (h[1] - 0.03).abs() < 1e-3 && (h[2] - 0.05).abs() < 1e-3);
        assert!(m.points().iter().all(|p| p.z >= 0.0 && p.z <= 0.04));
    }

    #[test]
    fn cylinder_points_on_surface() {
        let m = sample_model(Shape::Cylinder, &[0.03, 0.1], 1000, 2).unwrap();
        for p in m.points() {
            let rho = p.xy().norm();
            let on_side = (rho - 0.03).abs() < 1e-12;
            let on_cap = rho <= 0.03 + 1e-12 && (p.z == 0.0 || p.z == 0.1);
            assert!(on_side || on_cap);
        }
        assert!(sample_model(Shape::Cylinder, &[0.03], 10, 0).is_err());
    }

    #[test]
    fn partial_view_keeps_front() {
        let m = sample_model(Shape::Box, &[0.1, 0.1, 0.1], 1000, 3).unwrap();
        let v = partial_view(&m, &Vec3::x(), 0.7);
        assert_eq!(v.len(), 700);
        let min_kept = v.points().iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let dropped_max = m.points().iter().filter(|p| p.x < min_kept).count();
        assert_eq!(dropped_max, 300);
    }
}
