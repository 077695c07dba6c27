use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;

use graspkit::geometry::{fit_obb, transform_cloud, OrientedBoundingBox, PointCloud, Pose, Vec3};
use graspkit::harness::{oracle_width, oracle_width_rejects, sample_model, Shape};
use graspkit::planner::{check_width, closing_width, GraspCandidate, GridCell, CandidateStatus, GripperSpec};
use graspkit::spatial::{squared_distance, KdTree};
use graspkit::supervisor::{next_action, GraspAttemptRecord, GraspOutcome, SupervisorAction, SupervisorPolicy};

fn vec3(range: f64) -> impl Strategy<Value = Vec3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn rotation() -> impl Strategy<Value = UnitQuaternion<f64>> {
    (vec3(1.0), 0.0..std::f64::consts::PI).prop_map(|(axis, angle)| {
        let axis = if axis.norm() < 1e-6 { Vector3::z() } else { axis.normalize() };
        UnitQuaternion::from_scaled_axis(axis * angle)
    })
}

fn pose(range: f64) -> impl Strategy<Value = Pose> {
    (vec3(range), rotation()).prop_map(|(t, q)| Pose::new(t, q))
}

fn candidate(grasp_pose: Pose) -> GraspCandidate {
    GraspCandidate {
        index: 0,
        cell: GridCell { polar: 0, azimuth: 0, twist: 0 },
        polar_angle: 0.0,
        azimuth: 0.0,
        twist_angle: 0.0,
        grasp_pose,
        pre_grasp_pose: grasp_pose,
        approach_path: vec![grasp_pose],
        status: CandidateStatus::Pending,
        cost_terms: None,
        total_cost: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_with_inverse_is_identity(a in pose(5.0), p in vec3(2.0)) {
        let id = a.compose(&a.inverse());
        prop_assert!(id.position.norm() < 1e-12);
        prop_assert!(id.orientation.angle() < 1e-9);
        let round = a.inverse().transform_point(&a.transform_point(&p));
        prop_assert!((round - p).norm() < 1e-12);
    }

    #[test]
    fn compose_is_associative(a in pose(2.0), b in pose(2.0), c in pose(2.0), p in vec3(1.0)) {
        let l = a.compose(&b).compose(&c).transform_point(&p);
        let r = a.compose(&b.compose(&c)).transform_point(&p);
        prop_assert!((l - r).norm() < 1e-12);
    }

    #[test]
    fn transforms_preserve_distances(a in pose(3.0), pts in prop::collection::vec(vec3(1.0), 2..30)) {
        let moved = transform_cloud(&a, &PointCloud::new(pts.clone()).unwrap()).unwrap();
        for i in 0..pts.len() {
            for j in 0..i {
                let d0 = (pts[i] - pts[j]).norm();
                let d1 = (moved.points()[i] - moved.points()[j]).norm();
                prop_assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn obb_follows_rigid_motion(
        dims in (0.03..0.3f64, 0.03..0.3f64, 0.03..0.3f64),
        a in pose(1.0),
        seed in 0u64..1000,
    ) {
        let dims = [dims.0, dims.1, dims.2];
        let cloud = sample_model(Shape::Box, &dims, 600, seed).unwrap();
        let moved = transform_cloud(&a, &cloud).unwrap();
        let b0 = fit_obb(&cloud, false).unwrap();
        let b1 = fit_obb(&moved, false).unwrap();
        prop_assert!(moved.points().iter().all(|p| b1.contains(p, 1e-9)));
        prop_assert!((b0.volume() - b1.volume()).abs() / b0.volume() < 0.01);
        let truth: f64 = dims.iter().product();
        prop_assert!((b1.volume() - truth).abs() / truth < 0.05);
    }

    #[test]
    fn kd_tree_matches_brute_force(
        pts in prop::collection::vec(vec3(1.0), 1..400),
        dup in prop::collection::vec(any::<prop::sample::Index>(), 0..40),
        queries in prop::collection::vec((vec3(1.2), 0.0..0.5f64), 1..20),
    ) {
        // Duplicates exercise the multiset semantics and the tie rule.
        let mut pts = pts;
        let extra: Vec<Vec3> = dup.iter().map(|i| pts[i.index(pts.len())]).collect();
        pts.extend(extra);
        let tree = KdTree::from_points(&pts).unwrap();
        prop_assert_eq!(tree.len(), pts.len());
        let exact = pts.iter().take(5).map(|p| (*p, 0.0));
        for (q, r) in queries.iter().copied().chain(exact) {
            let q = &q;
            let mut got = tree.radius_query(q, r);
            got.sort_unstable();
            let want: Vec<usize> = (0..pts.len()).filter(|&i| squared_distance(&pts[i], q) <= r * r).collect();
            prop_assert_eq!(got, want);
            let (i, d) = tree.nearest(q);
            let best = (0..pts.len())
                .min_by(|&x, &y| squared_distance(&pts[x], q).total_cmp(&squared_distance(&pts[y], q)).then(x.cmp(&y)))
                .unwrap();
            prop_assert_eq!(i, best);
            prop_assert_eq!(d, squared_distance(&pts[best], q).sqrt());
        }
    }

    #[test]
    fn closing_width_matches_corner_projection(
        center in vec3(1.0),
        q in rotation(),
        half in (0.005..0.2f64, 0.005..0.2f64, 0.005..0.2f64),
        g in pose(1.0),
        clearance in 0.0..0.02f64,
    ) {
        let obb = OrientedBoundingBox::new(center, q, Vec3::new(half.0, half.1, half.2));
        prop_assert!((closing_width(&obb, &g) - oracle_width(&obb, &g)).abs() < 1e-12);
        let gripper = GripperSpec::default();
        let c = candidate(g);
        let w = oracle_width(&obb, &g);
        let limit = gripper.max_opening - clearance;
        // Decisions agree away from floating-point ties at the limit.
        if (w - limit).abs() > 1e-12 {
            prop_assert_eq!(check_width(&c, &obb, &gripper, clearance), oracle_width_rejects(&c, &obb, &gripper, clearance));
        }
    }

    #[test]
    fn retries_bounded_by_budget(outcomes in prop::collection::vec(0u8..3, 1..8), max_retries in 0usize..4) {
        let policy = SupervisorPolicy { max_retries, ..Default::default() };
        let mut history = Vec::new();
        for (k, o) in outcomes.iter().enumerate() {
            let outcome = [GraspOutcome::Success, GraspOutcome::EmptyClose, GraspOutcome::Slip][*o as usize];
            history.push(GraspAttemptRecord { attempt_index: k + 1, encoder_width: 0.0, expected_width: 0.0, outcome });
            let failures = history.iter().filter(|r| r.outcome.is_failure()).count();
            let action = next_action(&history, &policy).unwrap();
            match action {
                SupervisorAction::Proceed => prop_assert_eq!(outcome, GraspOutcome::Success),
                SupervisorAction::RetryGrasp => prop_assert!(failures <= max_retries),
                SupervisorAction::Handover => prop_assert!(failures > max_retries),
            }
            if action != SupervisorAction::RetryGrasp {
                break;
            }
        }
    }
}
