//! Hypothesize-and-verify pose estimation over mixed points and lines.

use nalgebra::Vector2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{CameraRig, LineCorrespondence, PointCorrespondence, RigidTransform};
use crate::metrics::{line_reprojection_distance, point_reprojection_error, project_line};
use crate::solver::{
    cheirality_filter, solve_p1l2, solve_p2l1, CheiralityMode, P1L2Problem, P2L1Problem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    P2L1,
    P1L2,
    /// Two points and a line when there are two points, else one point and two lines.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub point_threshold_px: f64,
    /// Threshold on the exponential line distance.
    pub line_threshold: f64,
    /// Fraction of all points and lines that must be inliers to stop early.
    pub required_inlier_fraction: f64,
    pub max_iterations: usize,
    pub sampling_mode: SamplingMode,
    pub seed: u64,
    pub keep_log: bool,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            point_threshold_px: 2.0,
            line_threshold: 2.0,
            required_inlier_fraction: 0.3,
            max_iterations: 1000,
            sampling_mode: SamplingMode::Auto,
            seed: 0,
            keep_log: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RansacError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no hypothesis could be scored")]
    NoConsensus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub hypotheses: usize,
    pub best_inliers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub best_pose: RigidTransform,
    pub point_inliers: Vec<usize>,
    pub line_inliers: Vec<usize>,
    pub iterations_used: usize,
    pub achieved_inlier_fraction: f64,
    /// The required inlier fraction was reached.
    pub success: bool,
    pub log: Vec<IterationLog>,
}

/// Inlier sets of one pose under the configured thresholds.
pub fn score_pose(
    pose: &RigidTransform,
    points: &[PointCorrespondence],
    lines: &[LineCorrespondence],
    rig: &CameraRig,
    config: &RansacConfig,
) -> (Vec<usize>, Vec<usize>) {
    let point_inliers = points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            observed_pixel(rig, p).is_some_and(|px| {
                point_reprojection_error(pose, rig, p.camera, &p.world, &px)
                    <= config.point_threshold_px
            })
        })
        .map(|(i, _)| i)
        .collect();
    let line_inliers = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            let Some([u1, u2]) = l.pixel_endpoints else {
                return false;
            };
            project_line(pose, rig, l.camera, &l.world)
                .and_then(|img| line_reprojection_distance(&u1, &u2, &img))
                .is_ok_and(|d| d <= config.line_threshold)
        })
        .map(|(i, _)| i)
        .collect();
    (point_inliers, line_inliers)
}

/// Pixel at which a bearing was observed.
fn observed_pixel(rig: &CameraRig, p: &PointCorrespondence) -> Option<Vector2<f64>> {
    rig.cameras[p.camera].intrinsics.project(&p.bearing)
}

pub fn ransac_pose(
    points: &[PointCorrespondence],
    lines: &[LineCorrespondence],
    rig: &CameraRig,
    config: &RansacConfig,
) -> Result<RansacResult, RansacError> {
    if !(config.point_threshold_px > 0.0) || !(config.line_threshold > 0.0) {
        return Err(RansacError::InvalidConfig("thresholds must be positive"));
    }
    if !(config.required_inlier_fraction > 0.0 && config.required_inlier_fraction <= 1.0) {
        return Err(RansacError::InvalidConfig(
            "inlier fraction must be in (0, 1]",
        ));
    }
    let mode = match config.sampling_mode {
        SamplingMode::Auto if points.len() >= 2 && !lines.is_empty() => SamplingMode::P2L1,
        SamplingMode::Auto => SamplingMode::P1L2,
        m => m,
    };
    let (need_p, need_l) = match mode {
        SamplingMode::P2L1 => (2, 1),
        _ => (1, 2),
    };
    if points.len() < need_p || lines.len() < need_l {
        return Err(RansacError::InsufficientData(format!(
            "sampling needs {need_p} points and {need_l} lines, got {} and {}",
            points.len(),
            lines.len()
        )));
    }
    let outside = points
        .iter()
        .map(|p| p.camera)
        .chain(lines.iter().map(|l| l.camera));
    if let Some(cam) = outside.into_iter().find(|&c| c >= rig.len()) {
        return Err(RansacError::InsufficientData(format!(
            "observation refers to camera {cam} outside the rig"
        )));
    }
    if lines.iter().any(|l| l.pixel_endpoints.is_none()) {
        return Err(RansacError::InsufficientData(
            "line scoring needs pixel endpoints for every line".into(),
        ));
    }

    let total = (points.len() + lines.len()) as f64;
    let required = (config.required_inlier_fraction * total).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(RigidTransform, Vec<usize>, Vec<usize>)> = None;
    let mut best_count = 0;
    let mut log = Vec::new();
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        let ps = sample(&mut rng, points.len(), need_p).into_vec();
        let ls = sample(&mut rng, lines.len(), need_l).into_vec();
        let solved = match mode {
            SamplingMode::P2L1 => solve_p2l1(&P2L1Problem {
                rig,
                line: lines[ls[0]],
                point2: points[ps[0]],
                point3: points[ps[1]],
            }),
            _ => solve_p1l2(&P1L2Problem {
                rig,
                line1: lines[ls[0]],
                point2: points[ps[0]],
                line3: lines[ls[1]],
            }),
        };
        let hypotheses = solved
            .map(|s| cheirality_filter(&s, CheiralityMode::Remove))
            .unwrap_or_default();
        for h in &hypotheses {
            let (pi, li) = score_pose(&h.pose, points, lines, rig, config);
            let count = pi.len() + li.len();
            if best.is_none() || count > best_count {
                best_count = count;
                best = Some((h.pose, pi, li));
            }
        }
        if config.keep_log {
            log.push(IterationLog {
                iteration: iterations,
                hypotheses: hypotheses.len(),
                best_inliers: best_count,
            });
        }
        if best.is_some() && best_count >= required {
            break;
        }
    }

    let (best_pose, point_inliers, line_inliers) = best.ok_or(RansacError::NoConsensus)?;
    Ok(RansacResult {
        best_pose,
        point_inliers,
        line_inliers,
        iterations_used: iterations,
        achieved_inlier_fraction: best_count as f64 / total,
        success: best_count >= required,
        log,
    })
}
