//! Register a known object model to a one-sided view and merge the two to
//! recover the hidden back of the object before fitting its box.
//!
//! cargo run --release --example complete_partial_view

use graspkit::geometry::{fit_obb, transform_cloud, Pose, Vec3};
use graspkit::harness::{partial_view, sample_model, Shape};
use graspkit::registration::{complete_cloud, register_model, IcpParams};

fn main() -> graspkit::Result<()> {
    let model = sample_model(Shape::Box, &[0.16, 0.08, 0.05], 800, 1)?;

    // The object sits 0.7 m ahead, turned by 25 degrees; the camera only
    // sees the two thirds of it facing the robot.
    let truth = Pose::from_yaw(Vec3::new(0.7, 0.05, 0.76), 25f64.to_radians());
    let scene_full = transform_cloud(&truth, &sample_model(Shape::Box, &[0.16, 0.08, 0.05], 800, 2)?)?;
    let view = partial_view(&scene_full, &Vec3::new(-1.0, 0.0, 0.3), 0.65);

    let result = register_model(&view, &model, &IcpParams::default())?;
    let est = result.model_to_scene;
    println!(
        "icp: {} iterations, rmse {:.5} m, converged {}",
        result.iterations, result.rmse, result.converged
    );
    println!(
        "pose error: {:.2} mm, {:.3} deg",
        1e3 * (est.position - truth.position).norm(),
        est.angle_to(&truth).to_degrees()
    );

    let partial_box = fit_obb(&view, true)?;
    let completed = complete_cloud(&view, &model, &result)?;
    let full_box = fit_obb(&completed, true)?;
    println!("partial view box volume   {:.3e} m^3", partial_box.volume());
    println!("completed cloud box volume {:.3e} m^3 (true {:.3e})", full_box.volume(), 0.16 * 0.08 * 0.05);
    Ok(())
}
