//! Subcommand implementations behind the `mppose` binary.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mppose_core::ransac::{ransac_pose, RansacConfig, RansacError, SamplingMode};
use mppose_core::sim::{generate_scene, trial_seed, SceneConfig};
use mppose_core::solver::{
    cheirality_filter, solve_p1l2, solve_p2l1, CheiralityMode, P1L2Problem, P2L1Problem,
    PoseSolution, SolveError,
};

use crate::experiments::{bench_noise, bench_numeric, pose_errors};
use crate::instance::{load_instance, Instance, InstanceError, InstanceFile, PoseEntry};
use crate::report::{summarize, summarize_noise, write_rows, SolverKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("no consensus: {0}")]
    NoConsensus(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Degenerate(_) => 2,
            CliError::NoConsensus(_) => 3,
        }
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn_all(instance: &Instance) {
    for w in &instance.warnings {
        eprintln!("warning: {w}");
    }
}

/// A candidate pose as printed by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionOutput {
    pub pose: PoseEntry,
    pub depths: Vec<f64>,
    pub residual_norm: f64,
    pub cheirality_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rot_err_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trans_err: Option<f64>,
}

fn require(have: usize, need: usize, field: &str, solver: &str) -> Result<(), CliError> {
    if have < need {
        return Err(CliError::Input(format!(
            "{solver} needs `{field}[{}]` but the instance has {have} {field}",
            need - 1
        )));
    }
    Ok(())
}

pub fn cmd_solve(
    input: &Path,
    solver: SolverKind,
    cheirality: bool,
) -> Result<Vec<SolutionOutput>, CliError> {
    let inst = load_instance(input)?;
    warn_all(&inst);
    let result = match solver {
        SolverKind::P2l1 => {
            require(inst.points.len(), 2, "points", "p2l1")?;
            require(inst.lines.len(), 1, "lines", "p2l1")?;
            solve_p2l1(&P2L1Problem {
                rig: &inst.rig,
                line: inst.lines[0],
                point2: inst.points[0],
                point3: inst.points[1],
            })
        }
        SolverKind::P1l2 => {
            require(inst.points.len(), 1, "points", "p1l2")?;
            require(inst.lines.len(), 2, "lines", "p1l2")?;
            solve_p1l2(&P1L2Problem {
                rig: &inst.rig,
                line1: inst.lines[0],
                point2: inst.points[0],
                line3: inst.lines[1],
            })
        }
    };
    let solutions: Vec<PoseSolution> = match result {
        Ok(s) => s,
        Err(e @ (SolveError::DegenerateConfiguration(_) | SolveError::DegenerateSystem(_))) => {
            return Err(CliError::Degenerate(e.to_string()))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let solutions = if cheirality {
        cheirality_filter(&solutions, CheiralityMode::Remove)
    } else {
        solutions
    };
    Ok(solutions
        .iter()
        .map(|s| {
            let errs = inst.ground_truth.map(|gt| pose_errors(&s.pose, &gt));
            SolutionOutput {
                pose: PoseEntry::from_transform(&s.pose),
                depths: s.depths.clone(),
                residual_norm: s.residual_norm,
                cheirality_ok: s.cheirality_ok,
                rot_err_deg: errs.map(|e| e.0),
                trans_err: errs.map(|e| e.1),
            }
        })
        .collect())
}

pub fn run_solve(input: &Path, solver: SolverKind, cheirality: bool) -> Result<(), CliError> {
    write_json(&cmd_solve(input, solver, cheirality)?, None)
}

fn write_csv(path: &Path, rows: &[crate::report::ReportRow]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_rows(BufWriter::new(file), rows).map_err(|e| io_err(path, e))
}

pub fn run_bench_numeric(trials: u64, seed: u64, out: &Path, timing: bool) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let rows = bench_numeric(trials, seed, timing);
    write_csv(out, &rows)?;
    write_json(&summarize(&rows), None)
}

pub fn parse_levels(text: &str) -> Result<Vec<f64>, CliError> {
    let levels = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0 && v.is_finite())
                .ok_or_else(|| {
                    CliError::Input(format!("--levels: {s:?} is not a non-negative number"))
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err(CliError::Input("--levels is empty".into()));
    }
    Ok(levels)
}

pub fn run_bench_noise(
    trials: u64,
    levels: &str,
    seed: u64,
    out: &Path,
    timing: bool,
) -> Result<(), CliError> {
    let levels = parse_levels(levels)?;
    if trials == 0 {
        return Err(CliError::Input(
            "--trials-per-level must be at least 1".into(),
        ));
    }
    let rows = bench_noise(&levels, trials, seed, timing);
    write_csv(out, &rows)?;
    write_json(&summarize_noise(&rows), None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacOutput {
    pub success: bool,
    pub best_pose: PoseEntry,
    pub point_inliers: Vec<usize>,
    pub line_inliers: Vec<usize>,
    pub iterations_used: usize,
    pub achieved_inlier_fraction: f64,
    pub required_inlier_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rot_err_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trans_err: Option<f64>,
}

/// Runs RANSAC on a dataset. The output is written even when the required
/// fraction is missed, and the error then carries exit code 3.
pub fn run_ransac(
    input: &Path,
    config: &RansacConfig,
    out: Option<&Path>,
) -> Result<RansacOutput, CliError> {
    let inst = load_instance(input)?;
    warn_all(&inst);
    if inst.points.len() + inst.lines.len() < 3 {
        return Err(CliError::Input("dataset needs at least 3 features".into()));
    }
    let result =
        ransac_pose(&inst.points, &inst.lines, &inst.rig, config).map_err(|e| match e {
            RansacError::NoConsensus => CliError::NoConsensus(e.to_string()),
            other => CliError::Input(other.to_string()),
        })?;
    let errs = inst
        .ground_truth
        .map(|gt| pose_errors(&result.best_pose, &gt));
    let output = RansacOutput {
        success: result.success,
        best_pose: PoseEntry::from_transform(&result.best_pose),
        point_inliers: result.point_inliers,
        line_inliers: result.line_inliers,
        iterations_used: result.iterations_used,
        achieved_inlier_fraction: result.achieved_inlier_fraction,
        required_inlier_fraction: config.required_inlier_fraction,
        rot_err_deg: errs.map(|e| e.0),
        trans_err: errs.map(|e| e.1),
    };
    write_json(&output, out)?;
    if !output.success {
        return Err(CliError::NoConsensus(format!(
            "best hypothesis has inlier fraction {:.4} < {} after {} iterations",
            output.achieved_inlier_fraction,
            config.required_inlier_fraction,
            output.iterations_used
        )));
    }
    Ok(output)
}

pub fn parse_mode(s: &str) -> Result<SamplingMode, String> {
    match s {
        "p2l1" => Ok(SamplingMode::P2L1),
        "p1l2" => Ok(SamplingMode::P1L2),
        "auto" => Ok(SamplingMode::Auto),
        _ => Err(format!("unknown sampling mode {s:?}")),
    }
}

/// Dataset generation settings; every field is optional in the JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub instances: usize,
    pub seed: u64,
    pub n_cameras: usize,
    pub n_points: usize,
    pub n_lines: usize,
    pub noise_px: f64,
    pub central: bool,
    /// Fraction of features whose world geometry is replaced.
    pub outlier_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            instances: 10,
            seed: 0,
            n_cameras: 3,
            n_points: 2,
            n_lines: 2,
            noise_px: 0.0,
            central: false,
            outlier_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
}

/// Written next to the instances; accepted back by `--config` to replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config: SynthConfig,
    pub instances: Vec<ManifestEntry>,
}

pub fn read_synth_config(path: &Path) -> Result<SynthConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    let is_manifest = value.get("config").is_some();
    let parsed = if is_manifest {
        serde_json::from_value::<Manifest>(value).map(|m| m.config)
    } else {
        serde_json::from_value::<SynthConfig>(value)
    };
    let config = parsed.map_err(|e| io_err(path, e))?;
    if config.instances == 0 {
        return Err(io_err(path, "instances must be at least 1"));
    }
    if !(0.0..=1.0).contains(&config.outlier_fraction) {
        return Err(io_err(path, "outlier_fraction must be in [0, 1]"));
    }
    Ok(config)
}

pub fn cmd_synth(config: &SynthConfig, out: &Path) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut instances = Vec::with_capacity(config.instances);
    for i in 0..config.instances {
        let seed = trial_seed(config.seed, i as u64);
        let mut scene = generate_scene(&SceneConfig {
            n_cameras: config.n_cameras,
            n_points: config.n_points,
            n_lines: config.n_lines,
            noise_px: config.noise_px,
            central: config.central,
            seed,
            ..SceneConfig::default()
        })
        .map_err(|e| CliError::Input(format!("instance {i}: {e}")))?;
        if config.outlier_fraction > 0.0 {
            scene.add_outliers(config.outlier_fraction, trial_seed(seed, 1));
        }
        let file = format!("instance_{i:05}.json");
        InstanceFile::from_scene(&scene).write(&out.join(&file))?;
        instances.push(ManifestEntry { file, seed });
    }
    let manifest = Manifest {
        config: config.clone(),
        instances,
    };
    write_json(&manifest, Some(&out.join("manifest.json")))?;
    Ok(manifest)
}

pub fn run_synth(config_path: Option<&PathBuf>, out: &Path) -> Result<(), CliError> {
    let config = match config_path {
        Some(p) => read_synth_config(p)?,
        None => SynthConfig::default(),
    };
    let manifest = cmd_synth(&config, out)?;
    eprintln!(
        "wrote {} instances to {}",
        manifest.instances.len(),
        out.display()
    );
    Ok(())
}
