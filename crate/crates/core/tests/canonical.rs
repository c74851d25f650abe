use mppose_core::canonical::{two_angle_decompose, two_angle_rotation, CanonicalFrames};
use mppose_core::sim::{generate_scene, trial_seed, SceneConfig};

#[test]
fn ground_truth_round_trips_through_canonical_frames() {
    for t in 0..1000 {
        let scene = generate_scene(&SceneConfig::p2l1(trial_seed(41, t))).unwrap();
        let line = &scene.lines[0].correspondence;
        let point = &scene.points[0].correspondence;
        let cam = &scene.rig.cameras[line.camera].extrinsic;
        let plane = cam.transform_plane(&line.plane);
        let frames =
            CanonicalFrames::new(&line.world, &point.world, &plane, &cam.translation).unwrap();
        let scale = scene.scale();

        let l = frames.world.transform_line(&line.world);
        assert!(l.direction.normalize().y.abs() > 1.0 - 1e-12);
        assert!(l.moment.norm() <= 1e-10 * scale);
        let p2 = frames.world.transform_point(&point.world);
        assert!(p2.x.abs().max(p2.y.abs()) <= 1e-10 * scale);

        let pl = frames.rig.transform_plane(&plane);
        assert!(pl.normal.normalize().z.abs() > 1.0 - 1e-12);
        assert!(pl.offset.abs() <= 1e-10 * scale);
        assert!(frames.rig.transform_point(&cam.translation).norm() <= 1e-10 * scale);

        let canonical = frames.pose_to_canonical(&scene.ground_truth);
        // The canonical pose keeps the y-axis line inside z = 0, so it has the
        // two-angle form.
        let (theta, alpha) = two_angle_decompose(&canonical.rotation);
        let rebuilt = two_angle_rotation(theta.cos(), theta.sin(), alpha.cos(), alpha.sin());
        assert!((rebuilt - canonical.rotation).amax() <= 1e-9, "trial {t}");
        let back = frames.pose_from_canonical(&canonical);
        assert!((back.rotation - scene.ground_truth.rotation).amax() <= 1e-12);
        assert!((back.translation - scene.ground_truth.translation).amax() <= 1e-10 * scale);
    }
}
