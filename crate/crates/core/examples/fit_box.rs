//! Fit oriented bounding boxes to sampled boxes and cylinders and compare
//! their volume with the true (circumscribed) box.
//!
//! cargo run --example fit_box

use graspkit::geometry::{fit_obb, transform_cloud, Pose, Vec3, FIT_TOLERANCE};
use graspkit::harness::{sample_model, Shape};

fn main() -> graspkit::Result<()> {
    let cases = [
        (Shape::Box, vec![0.12, 0.08, 0.05]),
        (Shape::Box, vec![0.06, 0.06, 0.06]),
        (Shape::Cylinder, vec![0.035, 0.12]),
    ];
    for (shape, dims) in cases {
        let truth = match shape {
            Shape::Box => dims[0] * dims[1] * dims[2],
            Shape::Cylinder => 4.0 * dims[0] * dims[0] * dims[1],
        };
        let model = sample_model(shape, &dims, 3000, 42)?;
        // Put the object somewhere on a table, rotated about Z.
        let placed = transform_cloud(&Pose::from_yaw(Vec3::new(0.7, -0.1, 0.75), 0.6), &model)?;
        for gravity in [false, true] {
            let obb = fit_obb(&placed, gravity)?;
            let inside = placed.points().iter().all(|p| obb.contains(p, FIT_TOLERANCE));
            println!(
                "{shape:?} {dims:?} gravity={gravity:<5} half-extents [{:.4} {:.4} {:.4}] volume error {:+.2}% all inside: {inside}",
                obb.half_extents.x,
                obb.half_extents.y,
                obb.half_extents.z,
                100.0 * (obb.volume() / truth - 1.0),
            );
        }
    }
    Ok(())
}
