//! Seeded synthetic trials for the numeric, timing and noise experiments.

use std::time::Instant;

use rayon::prelude::*;

use mppose_core::geometry::RigidTransform;
use mppose_core::metrics::{rotation_error_deg, translation_error};
use mppose_core::sim::{generate_scene, trial_seed, SceneConfig, SyntheticScene};
use mppose_core::solver::{
    cheirality_filter, solve_p1l2, solve_p2l1, CheiralityMode, PoseSolution, SolveError,
};

use crate::report::{ReportRow, SolverKind, TrialStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub noise_px: f64,
    /// All cameras share one extrinsic.
    pub central: bool,
    pub timing: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        Self {
            noise_px: 0.0,
            central: false,
            timing: true,
        }
    }
}

/// Everything one trial produced, for callers that need more than the row.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub row: ReportRow,
    pub scene: Option<SyntheticScene>,
    pub solutions: Vec<PoseSolution>,
    pub cheiral: Vec<PoseSolution>,
}

/// Scene seed of a trial; the two solvers draw from disjoint streams.
pub fn scene_seed(base: u64, solver: SolverKind, trial: u64) -> u64 {
    let stream = match solver {
        SolverKind::P2l1 => 0,
        SolverKind::P1l2 => 1,
    };
    trial_seed(trial_seed(base, stream), trial)
}

/// Rotation and translation error of one pose against the ground truth.
pub fn pose_errors(pose: &RigidTransform, gt: &RigidTransform) -> (f64, f64) {
    (
        rotation_error_deg(&pose.rotation, &gt.rotation).unwrap_or(f64::NAN),
        translation_error(&pose.translation, &gt.translation),
    )
}

/// Errors of the solution closest to the ground truth; NaN for an empty set.
pub fn best_errors(solutions: &[PoseSolution], gt: &RigidTransform) -> (f64, f64) {
    solutions
        .iter()
        .map(|s| pose_errors(&s.pose, gt))
        .fold((f64::NAN, f64::NAN), |best, e| {
            if best.0.is_nan() || e.0 + e.1 < best.0 + best.1 {
                e
            } else {
                best
            }
        })
}

pub fn solve_scene(
    solver: SolverKind,
    scene: &SyntheticScene,
) -> Result<Vec<PoseSolution>, SolveError> {
    match solver {
        SolverKind::P2l1 => solve_p2l1(&scene.p2l1_problem(0, 0, 1)),
        SolverKind::P1l2 => solve_p1l2(&scene.p1l2_problem(0, 0, 1)),
    }
}

pub fn run_trial(
    solver: SolverKind,
    base_seed: u64,
    trial: u64,
    opts: &TrialOptions,
) -> TrialOutcome {
    let seed = scene_seed(base_seed, solver, trial);
    let config = match solver {
        SolverKind::P2l1 => SceneConfig::p2l1(seed),
        SolverKind::P1l2 => SceneConfig::p1l2(seed),
    };
    let config = SceneConfig {
        noise_px: opts.noise_px,
        central: opts.central,
        ..config
    };
    let mut row = ReportRow {
        solver,
        noise_px: opts.noise_px,
        trial,
        n_solutions: 0,
        n_solutions_cheiral: 0,
        rot_err_deg: f64::NAN,
        trans_err: f64::NAN,
        solve_time_us: 0.0,
        status: TrialStatus::Error,
    };
    let Ok(scene) = generate_scene(&config) else {
        return TrialOutcome {
            row,
            scene: None,
            solutions: vec![],
            cheiral: vec![],
        };
    };
    let start = Instant::now();
    let result = solve_scene(solver, &scene);
    if opts.timing {
        row.solve_time_us = start.elapsed().as_secs_f64() * 1e6;
    }
    let solutions = match result {
        Ok(s) => s,
        Err(e) => {
            row.status = match e {
                SolveError::DegenerateConfiguration(_) | SolveError::DegenerateSystem(_) => {
                    TrialStatus::Degenerate
                }
                SolveError::InvalidInput(_) => TrialStatus::Error,
            };
            return TrialOutcome {
                row,
                scene: Some(scene),
                solutions: vec![],
                cheiral: vec![],
            };
        }
    };
    let cheiral = cheirality_filter(&solutions, CheiralityMode::Remove);
    let (rot, trans) = best_errors(&solutions, &scene.ground_truth);
    row.n_solutions = solutions.len();
    row.n_solutions_cheiral = cheiral.len();
    row.rot_err_deg = rot;
    row.trans_err = trans;
    row.status = if solutions.is_empty() {
        TrialStatus::NoSolution
    } else {
        TrialStatus::Ok
    };
    TrialOutcome {
        row,
        scene: Some(scene),
        solutions,
        cheiral,
    }
}

/// `trials` outcomes per solver, in (solver, trial) order regardless of the
/// number of worker threads.
pub fn run_batch(
    solvers: &[SolverKind],
    trials: u64,
    base_seed: u64,
    opts: &TrialOptions,
) -> Vec<TrialOutcome> {
    let jobs: Vec<(SolverKind, u64)> = solvers
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .collect();
    jobs.par_iter()
        .map(|&(s, t)| run_trial(s, base_seed, t, opts))
        .collect()
}

/// Rows of the noiseless experiment for both solvers.
pub fn bench_numeric(trials: u64, seed: u64, timing: bool) -> Vec<ReportRow> {
    let opts = TrialOptions {
        timing,
        ..TrialOptions::default()
    };
    run_batch(&SolverKind::ALL, trials, seed, &opts)
        .into_iter()
        .map(|o| o.row)
        .collect()
}

/// Rows of the noise sweep, grouped by level then solver. Every level reuses
/// the same trial seeds.
pub fn bench_noise(levels: &[f64], trials: u64, seed: u64, timing: bool) -> Vec<ReportRow> {
    levels
        .iter()
        .flat_map(|&noise_px| {
            let opts = TrialOptions {
                noise_px,
                timing,
                ..TrialOptions::default()
            };
            run_batch(&SolverKind::ALL, trials, seed, &opts)
                .into_iter()
                .map(|o| o.row)
        })
        .collect()
}

/// Thread pool capped by `MPPOSE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MPPOSE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("MPPOSE_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            return Err("MPPOSE_THREADS must be at least 1".into());
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}
