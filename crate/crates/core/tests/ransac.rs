use mppose_core::metrics::{rotation_error_deg, translation_error};
use mppose_core::ransac::{ransac_pose, score_pose, RansacConfig, RansacError, SamplingMode};
use mppose_core::sim::{generate_scene, trial_seed, SceneConfig, SyntheticScene};

fn scene(seed: u64, noise: f64) -> SyntheticScene {
    generate_scene(&SceneConfig {
        n_points: 50,
        n_lines: 50,
        noise_px: noise,
        seed,
        ..SceneConfig::default()
    })
    .unwrap()
}

fn errors(scene: &SyntheticScene, pose: &mppose_core::geometry::RigidTransform) -> (f64, f64) {
    (
        rotation_error_deg(&pose.rotation, &scene.ground_truth.rotation).unwrap(),
        translation_error(&pose.translation, &scene.ground_truth.translation),
    )
}

#[test]
fn clean_data_reaches_full_consensus() {
    for mode in [SamplingMode::P2L1, SamplingMode::P1L2, SamplingMode::Auto] {
        let s = scene(1, 0.0);
        let config = RansacConfig {
            required_inlier_fraction: 1.0,
            sampling_mode: mode,
            ..RansacConfig::default()
        };
        let r = ransac_pose(
            &s.point_correspondences(),
            &s.line_correspondences(),
            &s.rig,
            &config,
        )
        .unwrap();
        assert!(r.success);
        assert_eq!(r.achieved_inlier_fraction, 1.0);
        assert_eq!(r.iterations_used, 1);
        let (re, te) = errors(&s, &r.best_pose);
        assert!(re < 1e-5 && te < 1e-5, "{re} {te}");
    }
}

#[test]
fn outliers_are_rejected() {
    let mut good = 0;
    for run in 0..30 {
        let mut s = scene(trial_seed(2, run), 0.5);
        let (po, lo) = s.add_outliers(0.3, trial_seed(3, run));
        let config = RansacConfig {
            required_inlier_fraction: 0.4,
            seed: run,
            ..RansacConfig::default()
        };
        let r = ransac_pose(
            &s.point_correspondences(),
            &s.line_correspondences(),
            &s.rig,
            &config,
        )
        .unwrap();
        assert!(r.success && r.achieved_inlier_fraction >= 0.4);
        let (re, te) = errors(&s, &r.best_pose);
        if re < 0.5 && te < 0.01 * s.scale() {
            good += 1;
        }
        // Reported inliers re-verify and corrupted features rarely sneak in.
        let (pi, li) = score_pose(
            &r.best_pose,
            &s.point_correspondences(),
            &s.line_correspondences(),
            &s.rig,
            &config,
        );
        assert_eq!(
            (pi.clone(), li.clone()),
            (r.point_inliers.clone(), r.line_inliers.clone())
        );
        let bad = pi.iter().filter(|&&i| po[i]).count() + li.iter().filter(|&&i| lo[i]).count();
        assert!(bad <= 3, "{bad} outliers accepted");
    }
    assert!(good >= 28, "{good}/30");
}

#[test]
fn unreachable_fraction_reports_failure() {
    let mut s = scene(4, 0.0);
    s.add_outliers(0.01, 9);
    let config = RansacConfig {
        required_inlier_fraction: 1.0,
        max_iterations: 50,
        ..RansacConfig::default()
    };
    let r = ransac_pose(
        &s.point_correspondences(),
        &s.line_correspondences(),
        &s.rig,
        &config,
    )
    .unwrap();
    assert!(!r.success);
    assert_eq!(r.iterations_used, 50);
    assert!(r.achieved_inlier_fraction < 1.0);
}

#[test]
fn deterministic_under_seed() {
    let mut s = scene(5, 1.0);
    s.add_outliers(0.3, 6);
    let config = RansacConfig {
        required_inlier_fraction: 0.6,
        seed: 12,
        keep_log: true,
        ..RansacConfig::default()
    };
    let a = ransac_pose(
        &s.point_correspondences(),
        &s.line_correspondences(),
        &s.rig,
        &config,
    );
    let b = ransac_pose(
        &s.point_correspondences(),
        &s.line_correspondences(),
        &s.rig,
        &config,
    );
    assert_eq!(a, b);
}

#[test]
fn larger_thresholds_never_lose_inliers() {
    let mut s = scene(7, 2.0);
    s.add_outliers(0.3, 8);
    let (pts, lines) = (s.point_correspondences(), s.line_correspondences());
    let base = RansacConfig {
        required_inlier_fraction: 1.0,
        max_iterations: 40,
        seed: 3,
        ..RansacConfig::default()
    };
    let mut last = 0;
    for scale in [0.5, 1.0, 2.0, 4.0] {
        let config = RansacConfig {
            point_threshold_px: 2.0 * scale,
            line_threshold: 2.0 * scale,
            ..base
        };
        let r = ransac_pose(&pts, &lines, &s.rig, &config).unwrap();
        let count = r.point_inliers.len() + r.line_inliers.len();
        assert!(count >= last, "{count} < {last}");
        last = count;
    }
}

#[test]
fn insufficient_and_invalid_inputs() {
    let s = scene(9, 0.0);
    let pts = s.point_correspondences();
    let lines = s.line_correspondences();
    let config = RansacConfig::default();
    assert!(matches!(
        ransac_pose(&pts[..1], &lines[..1], &s.rig, &config),
        Err(RansacError::InsufficientData(_))
    ));
    assert!(matches!(
        ransac_pose(
            &pts,
            &lines,
            &s.rig,
            &RansacConfig {
                required_inlier_fraction: 0.0,
                ..config
            }
        ),
        Err(RansacError::InvalidConfig(_))
    ));
    let mut no_px = lines.clone();
    no_px[0].pixel_endpoints = None;
    assert!(matches!(
        ransac_pose(&pts, &no_px, &s.rig, &config),
        Err(RansacError::InsufficientData(_))
    ));
}
