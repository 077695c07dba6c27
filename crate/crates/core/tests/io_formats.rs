use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graspkit::geometry::{PointCloud, Vec3};
use graspkit::harness::{cube_on_table, generate_scene};
use graspkit::io::{
    load_point_cloud, load_reachability_map, load_scene, write_ply, write_reachability_map, write_scene, GraspReport, PlyFormat,
    SceneSummary,
};
use graspkit::planner::{Planner, PlannerConfig};
use graspkit::reachability::{build_reachability_map, ArmModel};
use graspkit::supervisor::SupervisorPolicy;
use graspkit::Error;

#[test]
fn ascii_ply_three_points() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.ply");
    fs::write(
        &path,
        "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n1 0 0\n0 1 0.5\n",
    )
    .unwrap();
    let loaded = load_point_cloud(&path).unwrap();
    assert_eq!(loaded.dropped_non_finite, 0);
    assert_eq!(
        loaded.cloud.points(),
        &[Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.5)]
    );
}

#[test]
fn binary_roundtrip_is_bit_identical() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    // Values representable in f32, the on-disk precision.
    let pts: Vec<Vec3> = (0..10_000)
        .map(|_| Vec3::from_fn(|_, _| r.random_range(-5.0f32..5.0) as f64))
        .collect();
    let cloud = PointCloud::new(pts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ply");
    write_ply(&path, &cloud, PlyFormat::BinaryLittleEndian).unwrap();
    let back = load_point_cloud(&path).unwrap().cloud;
    assert_eq!(back.len(), cloud.len());
    for (a, b) in back.points().iter().zip(cloud.points()) {
        for k in 0..3 {
            assert_eq!(a[k].to_bits(), b[k].to_bits());
        }
    }
}

#[test]
fn non_finite_points_are_dropped_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nan.xyz");
    fs::write(&path, "0 0 0\nnan 1 1\n1 1 1\n").unwrap();
    let loaded = load_point_cloud(&path).unwrap();
    assert_eq!(loaded.cloud.len(), 2);
    assert_eq!(loaded.dropped_non_finite, 1);

    fs::write(&path, "nan 0 0\ninf 1 1\n").unwrap();
    assert!(matches!(load_point_cloud(&path), Err(Error::EmptyAfterFiltering { dropped: 2, .. })));
}

#[test]
fn malformed_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_point_cloud(dir.path().join("none.ply")), Err(Error::FileNotFound(_))));
    let path = dir.path().join("bad.xyz");
    fs::write(&path, "0 0 0\n1 two 3\n").unwrap();
    match load_point_cloud(&path) {
        Err(Error::MalformedFile { location, .. }) => assert_eq!(location, "line 2"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn reachmap_file_roundtrip() {
    let map = build_reachability_map(&ArmModel::default(), 0.1, 26, 20_000, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("arm.reachmap");
    write_reachability_map(&path, &map).unwrap();
    let cells: usize = map.dims().iter().product();
    assert_eq!(fs::metadata(&path).unwrap().len() as usize, 68 + cells * 26usize.div_ceil(8));
    assert_eq!(load_reachability_map(&path).unwrap(), map);

    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 1);
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_reachability_map(&path), Err(Error::MalformedFile { .. })));
}

#[test]
fn scene_schema_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    let cloud = "[object_cloud]\npoints = [[0.5,0,0.8],[0.55,0,0.8],[0.5,0.05,0.8],[0.5,0,0.85]]\n";
    let cases = [
        (cloud.to_string(), "version"),
        (format!("version = 2\n{cloud}"), "version"),
        (format!("version = 1\nframe = \"y_up\"\n{cloud}"), "world_z_up"),
        (format!("version = 1\ncolour = 3\n{cloud}"), "colour"),
        ("version = 1\n[object_cloud]\npath = \"a.ply\"\npoints = [[0,0,0]]\n".to_string(), "`path` or `points`"),
    ];
    for (text, needle) in cases {
        fs::write(&path, &text).unwrap();
        match load_scene(&path) {
            Err(e @ Error::MalformedFile { .. }) => assert!(e.to_string().contains(needle), "{e}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    fs::write(&path, "version = 1\n[object_cloud]\npath = \"missing.ply\"\n").unwrap();
    assert!(matches!(load_scene(&path), Err(Error::FileNotFound(_))));
    fs::write(&path, format!("version = 1\nframe = \"world_z_up\"\n{cloud}")).unwrap();
    assert_eq!(load_scene(&path).unwrap().scene.object_cloud.len(), 4);
}

#[test]
fn written_scene_reloads() {
    let recipe = cube_on_table(8);
    let scene = generate_scene(&recipe).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cube.toml");
    write_scene(&out, &scene, Some(&recipe)).unwrap();
    let loaded = load_scene(&out).unwrap();
    assert_eq!(loaded.scene.object_cloud.len(), scene.object_cloud.len());
    assert_eq!(loaded.scene.environment_cloud.len(), scene.environment_cloud.len());
    assert_eq!(loaded.scene.base_pose, scene.base_pose);
    assert_eq!(loaded.scene.workspace, scene.workspace);
    for (a, b) in loaded.scene.object_cloud.points().iter().zip(scene.object_cloud.points()) {
        assert!((a - b).norm() < 1e-6);
    }
}

#[test]
fn report_is_stable_json() {
    let scene = generate_scene(&cube_on_table(1)).unwrap();
    let config = PlannerConfig::default();
    let out = Planner::new().evaluate(&scene, &config).unwrap();
    let summary = SceneSummary {
        object_label: Some("cube".into()),
        object_points: scene.object_cloud.len(),
        environment_points: scene.environment_cloud.len(),
        dropped_points: 0,
        reachability_map: false,
    };
    let a = GraspReport::new(&out, &config, &SupervisorPolicy::default(), summary.clone()).to_json().unwrap();
    let b = GraspReport::new(&out, &config, &SupervisorPolicy::default(), summary).to_json().unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["candidate_count"], 180);
    assert_eq!(v["candidates"].as_array().unwrap().len(), 180);
    assert_eq!(v["selected"]["index"], out.selected.unwrap());
    assert!(v.get("timings_ms").is_none());
}
