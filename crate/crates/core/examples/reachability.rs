//! Sample an arm into a reachability map, query a few grasp poses and pick a
//! base placement for an object behind the robot.
//!
//! cargo run --release --example reachability

use graspkit::geometry::{fit_obb, PointCloud, Pose, Vec3};
use graspkit::reachability::{align_base, build_reachability_map, heading_error, is_reachable, AlignParams, ArmModel};

fn main() -> graspkit::Result<()> {
    let arm = ArmModel::default();
    let map = build_reachability_map(&arm, 0.05, 26, 400_000, 1)?;
    let d = map.dims();
    println!(
        "map: {}x{}x{} voxels of {} m, {:.1}% reachable",
        d[0],
        d[1],
        d[2],
        map.voxel_size(),
        100.0 * map.reachable_fraction()
    );

    // Poses in the robot base frame; X is the approach direction.
    let forward = Pose::from_translation(0.55, 0.0, 0.9);
    let down = Pose::from_axes(Vec3::new(0.55, 0.0, 0.9), -Vec3::z(), Vec3::y(), Vec3::x());
    let far = Pose::from_translation(1.6, 0.0, 0.9);
    for (name, pose) in [("forward", forward), ("top-down", down), ("out of reach", far)] {
        println!("{name:>13}: reachable = {}", is_reachable(&map, &pose));
    }

    let corners: Vec<Vec3> = (0..8)
        .map(|i| Vec3::new(-0.6 + 0.1 * (i & 1) as f64, 0.3 + 0.1 * (i >> 1 & 1) as f64, 0.75 + 0.1 * (i >> 2) as f64))
        .collect();
    let object = fit_obb(&PointCloud::new(corners)?, true)?;
    let base = align_base(&object, &map, None, &Pose::identity(), &AlignParams::default())?;
    println!(
        "object at [{:.2} {:.2}]: move base to [{:.2} {:.2}] yaw {:.1} deg (heading error {:.1} deg)",
        object.center.x,
        object.center.y,
        base.position.x,
        base.position.y,
        base.yaw().to_degrees(),
        heading_error(&base, &object.center).to_degrees()
    );
    Ok(())
}
