use mppose_core::geometry::{line_residual, point_residual, Frame, RigidTransform, Vec3};
use mppose_core::metrics::{rotation_error_deg, translation_error};
use mppose_core::poly::intersect_quadrics;
use mppose_core::sim::{generate_scene, random_rotation, trial_seed, SceneConfig, SyntheticScene};
use mppose_core::solver::{
    cheirality_filter, p2l1_quadrics, solve_p1l2, solve_p1l2_with_stats, solve_p2l1,
    CheiralityMode, PoseSolution, SolveError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn best_error(scene: &SyntheticScene, sols: &[PoseSolution]) -> (f64, f64) {
    sols.iter()
        .map(|s| {
            (
                rotation_error_deg(&s.pose.rotation, &scene.ground_truth.rotation).unwrap(),
                translation_error(&s.pose.translation, &scene.ground_truth.translation),
            )
        })
        .fold((f64::INFINITY, f64::INFINITY), |best, e| {
            if e.0 + e.1 < best.0 + best.1 {
                e
            } else {
                best
            }
        })
}

fn p2l1_scene(seed: u64, central: bool) -> SyntheticScene {
    generate_scene(&SceneConfig {
        central,
        ..SceneConfig::p2l1(seed)
    })
    .unwrap()
}

fn p1l2_scene(seed: u64, central: bool) -> SyntheticScene {
    generate_scene(&SceneConfig {
        central,
        ..SceneConfig::p1l2(seed)
    })
    .unwrap()
}

fn recovery_rate(central: bool, p2l1: bool, trials: u64, rot_tol: f64, trans_tol: f64) -> f64 {
    let mut ok = 0;
    for t in 0..trials {
        let seed = trial_seed(1000 + central as u64, t);
        let (scene, sols) = if p2l1 {
            let s = p2l1_scene(seed, central);
            let sols = solve_p2l1(&s.p2l1_problem(0, 0, 1)).unwrap_or_default();
            assert!(sols.len() <= 4);
            (s, sols)
        } else {
            let s = p1l2_scene(seed, central);
            let sols = solve_p1l2(&s.p1l2_problem(0, 0, 1)).unwrap_or_default();
            assert!(sols.len() <= 8);
            (s, sols)
        };
        let (r, tr) = best_error(&scene, &sols);
        if r < rot_tol && tr < trans_tol {
            ok += 1;
        }
    }
    ok as f64 / trials as f64
}

#[test]
fn p2l1_recovers_ground_truth() {
    let rate = recovery_rate(false, true, 1000, 1e-6, 1e-6);
    assert!(rate >= 0.999, "recovery rate {rate}");
}

#[test]
fn p2l1_recovers_ground_truth_central() {
    let rate = recovery_rate(true, true, 1000, 1e-6, 1e-6);
    assert!(rate >= 0.999, "recovery rate {rate}");
}

#[test]
fn p1l2_recovers_ground_truth() {
    let rate = recovery_rate(false, false, 1000, 1e-5, 1e-5);
    assert!(rate >= 0.995, "recovery rate {rate}");
}

#[test]
fn p1l2_recovers_ground_truth_central() {
    let rate = recovery_rate(true, false, 1000, 1e-5, 1e-5);
    assert!(rate >= 0.995, "recovery rate {rate}");
}

#[test]
fn returned_poses_satisfy_constraints() {
    for t in 0..300 {
        let scene = p2l1_scene(trial_seed(5, t), false);
        let prob = scene.p2l1_problem(0, 0, 1);
        let scale = scene.scale();
        for s in solve_p2l1(&prob).unwrap() {
            assert!(s.pose.is_rotation(1e-9));
            let r2 = point_residual(&s.pose, &scene.rig, &prob.point2, s.depths[0]).norm();
            let r3 = point_residual(&s.pose, &scene.rig, &prob.point3, s.depths[1]).norm();
            let rl = line_residual(&s.pose, &scene.rig, &prob.line).norm();
            assert!(
                r2.max(r3) <= 1e-6 * scale && rl <= 1e-6 * scale,
                "{r2} {r3} {rl}"
            );
        }
        let scene = p1l2_scene(trial_seed(6, t), false);
        let prob = scene.p1l2_problem(0, 0, 1);
        let scale = scene.scale();
        for s in solve_p1l2(&prob).unwrap() {
            assert!(s.pose.is_rotation(1e-9));
            let rp = point_residual(&s.pose, &scene.rig, &prob.point2, s.depths[0]).norm();
            let r1 = line_residual(&s.pose, &scene.rig, &prob.line1).norm();
            let r3 = line_residual(&s.pose, &scene.rig, &prob.line3).norm();
            assert!(rp.max(r1).max(r3) <= 1e-5 * scale, "{rp} {r1} {r3}");
        }
    }
}

#[test]
fn quadrics_vanish_at_true_depths() {
    for t in 0..200 {
        let scene = p2l1_scene(trial_seed(7, t), false);
        let [q1, q2] = p2l1_quadrics(&scene.p2l1_problem(0, 0, 1)).unwrap();
        let (d2, d3) = (scene.points[0].depth, scene.points[1].depth);
        let mag = 1.0 + d2 * d2 + d3 * d3;
        assert!(q1.eval(d2, d3).abs() <= 1e-9 * q1.max_abs_coeff() * mag);
        assert!(q2.eval(d2, d3).abs() <= 1e-9 * q2.max_abs_coeff() * mag);
        let pairs = intersect_quadrics(&q1, &q2).unwrap();
        assert!(
            pairs
                .iter()
                .any(|&(x, y)| (x - d2).abs() < 1e-7 * d2 && (y - d3).abs() < 1e-7 * d3),
            "{pairs:?} vs ({d2}, {d3})"
        );
    }
}

#[test]
fn hardcoded_quadrics_agree_with_distance_constraint() {
    // A rigid motion preserves the distance between the two points, which
    // gives an independent conic through the same depths.
    for t in 0..300 {
        let scene = p2l1_scene(trial_seed(8, t), false);
        let prob = scene.p2l1_problem(0, 0, 1);
        let ray = |p: &mppose_core::geometry::PointCorrespondence, d: f64| {
            scene.rig.cameras[p.camera]
                .extrinsic
                .transform_point(&(p.bearing * d))
        };
        let target = (prob.point2.world - prob.point3.world).norm();
        for s in solve_p2l1(&prob).unwrap() {
            let dist = (ray(&prob.point2, s.depths[0]) - ray(&prob.point3, s.depths[1])).norm();
            assert!(
                (dist - target).abs() <= 1e-7 * scene.scale(),
                "{dist} vs {target}"
            );
        }
    }
}

#[test]
fn cheirality_keeps_ground_truth() {
    for t in 0..500 {
        let scene = p2l1_scene(trial_seed(9, t), false);
        let all = solve_p2l1(&scene.p2l1_problem(0, 0, 1)).unwrap();
        let kept = cheirality_filter(&all, CheiralityMode::Remove);
        assert!(kept.len() <= all.len());
        let (r, tr) = best_error(&scene, &kept);
        assert!(r < 1e-6 && tr < 1e-6);
        assert!(kept.iter().all(|s| s.depths.iter().all(|&d| d > 0.0)));
    }
}

#[test]
fn point_on_line_is_degenerate() {
    let scene = p2l1_scene(3, false);
    let mut prob = scene.p2l1_problem(0, 0, 1);
    let line = prob.line.world;
    prob.point2.world = line.closest_point_to_origin() + line.direction * 2.5;
    assert!(matches!(
        solve_p2l1(&prob),
        Err(SolveError::DegenerateConfiguration(_))
    ));
    let scene = p1l2_scene(3, false);
    let mut prob = scene.p1l2_problem(0, 0, 1);
    let line = prob.line1.world;
    prob.point2.world = line.closest_point_to_origin() - line.direction;
    assert!(matches!(
        solve_p1l2(&prob),
        Err(SolveError::DegenerateConfiguration(_))
    ));
}

#[test]
fn identical_lines_do_not_crash() {
    for t in 0..50 {
        let scene = p1l2_scene(trial_seed(10, t), false);
        let prob = scene.p1l2_problem(0, 0, 0);
        match solve_p1l2(&prob) {
            Ok(sols) => assert!(sols.len() <= 8),
            Err(SolveError::DegenerateSystem(_)) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
}

#[test]
fn invalid_camera_index_is_rejected() {
    let scene = p2l1_scene(4, false);
    let mut prob = scene.p2l1_problem(0, 0, 1);
    prob.point3.camera = 17;
    assert!(matches!(
        solve_p2l1(&prob),
        Err(SolveError::InvalidInput(_))
    ));
}

fn moved(scene: &SyntheticScene, g: &RigidTransform) -> SyntheticScene {
    let mut out = scene.clone();
    for p in &mut out.points {
        p.correspondence.world = g.transform_point(&p.correspondence.world);
    }
    for l in &mut out.lines {
        l.correspondence.world = g.transform_line(&l.correspondence.world);
    }
    out
}

fn sets_match(a: &[PoseSolution], b: &[PoseSolution], g: &RigidTransform, tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|s| {
            let want = g.compose_unchecked(&s.pose);
            b.iter().any(|o| {
                (o.pose.rotation - want.rotation).amax() <= tol
                    && (o.pose.translation - want.translation).amax()
                        <= tol * (1.0 + want.translation.amax())
            })
        })
}

#[test]
fn solutions_follow_world_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for t in 0..200 {
        let g = RigidTransform::new(
            random_rotation(&mut rng),
            Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ),
            Frame::World,
            Frame::World,
        );
        let scene = p2l1_scene(trial_seed(11, t), false);
        let a = solve_p2l1(&scene.p2l1_problem(0, 0, 1)).unwrap();
        let b = solve_p2l1(&moved(&scene, &g).p2l1_problem(0, 0, 1)).unwrap();
        assert!(sets_match(&a, &b, &g, 1e-7), "p2l1 trial {t}");

        let scene = p1l2_scene(trial_seed(12, t), false);
        let a = solve_p1l2(&scene.p1l2_problem(0, 0, 1)).unwrap();
        let b = solve_p1l2(&moved(&scene, &g).p1l2_problem(0, 0, 1)).unwrap();
        assert!(sets_match(&a, &b, &g, 1e-7), "p1l2 trial {t}");
    }
}

#[test]
fn p1l2_sign_choice_satisfies_unsquared_constraint() {
    for t in 0..300 {
        let scene = p1l2_scene(trial_seed(13, t), false);
        let (sols, stats) = solve_p1l2_with_stats(&scene.p1l2_problem(0, 0, 1)).unwrap();
        assert!(sols.len() <= stats.octic_roots * 2);
        assert!(sols.len() <= 8);
    }
}
