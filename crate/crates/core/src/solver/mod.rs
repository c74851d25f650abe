//! Minimal absolute-pose solvers for a multi-camera rig.

mod p1l2;
mod p2l1;

use thiserror::Error;

use crate::canonical::{CanonicalError, CanonicalFrames};
use crate::geometry::{
    line_residual, point_residual, CameraRig, Frame, LineCorrespondence, PointCorrespondence,
    RigidTransform, Vec3,
};
use crate::poly::PolyError;

pub use p1l2::{p1l2_octic, solve_p1l2, solve_p1l2_with_stats, P1L2Problem, P1L2Stats};
pub use p2l1::{p2l1_quadrics, solve_p2l1, P2L1Problem};

/// Trig identities of recovered angles must hold to this tolerance.
pub const TRIG_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error("degenerate system: {0}")]
    DegenerateSystem(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<CanonicalError> for SolveError {
    fn from(e: CanonicalError) -> Self {
        match e {
            CanonicalError::DegenerateConfiguration(m) => SolveError::DegenerateConfiguration(m),
            CanonicalError::Geometry(crate::geometry::GeometryError::DegenerateInput(m)) => {
                SolveError::DegenerateConfiguration(m)
            }
            CanonicalError::Geometry(g) => SolveError::InvalidInput(g.to_string()),
        }
    }
}

impl From<PolyError> for SolveError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::DegenerateSystem(m)
            | PolyError::InvalidPolynomial(m)
            | PolyError::ShapeError(m) => SolveError::DegenerateSystem(m),
        }
    }
}

/// One candidate pose `T_CW` (rig → world).
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSolution {
    pub pose: RigidTransform,
    /// Depths of the point observations along their bearings, in problem order.
    pub depths: Vec<f64>,
    /// Euclidean norm of all stacked point and line residuals.
    pub residual_norm: f64,
    /// Every point depth is positive.
    pub cheirality_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheiralityMode {
    /// Drop solutions with a point behind its camera.
    #[default]
    Remove,
    /// Keep everything and only refresh the flags.
    Flag,
}

/// Applies the positive-depth requirement to a solution set.
pub fn cheirality_filter(solutions: &[PoseSolution], mode: CheiralityMode) -> Vec<PoseSolution> {
    let flagged = solutions.iter().map(|s| PoseSolution {
        cheirality_ok: s.depths.iter().all(|&d| d > 0.0),
        ..s.clone()
    });
    match mode {
        CheiralityMode::Flag => flagged.collect(),
        CheiralityMode::Remove => flagged.filter(|s| s.cheirality_ok).collect(),
    }
}

/// Either kind of minimal problem.
#[derive(Debug, Clone, Copy)]
pub enum MinimalProblem<'a> {
    P2L1(P2L1Problem<'a>),
    P1L2(P1L2Problem<'a>),
}

impl MinimalProblem<'_> {
    pub fn solve(&self) -> Result<Vec<PoseSolution>, SolveError> {
        match self {
            MinimalProblem::P2L1(p) => solve_p2l1(p),
            MinimalProblem::P1L2(p) => solve_p1l2(p),
        }
    }
}

fn check_camera(rig: &CameraRig, camera: usize, what: &str) -> Result<(), SolveError> {
    if camera < rig.len() {
        Ok(())
    } else {
        Err(SolveError::InvalidInput(format!(
            "{what} refers to camera {camera} but the rig has {}",
            rig.len()
        )))
    }
}

/// Canonical frames of a problem whose first line and first point are given.
fn canonical_frames(
    rig: &CameraRig,
    line: &LineCorrespondence,
    point: &PointCorrespondence,
) -> Result<CanonicalFrames, SolveError> {
    let cam = &rig.cameras[line.camera];
    let plane_rig = cam.extrinsic.transform_plane(&line.plane);
    Ok(CanonicalFrames::new(
        &line.world,
        &point.world,
        &plane_rig,
        &cam.center(),
    )?)
}

/// Bearing and camera center of a point observation in the canonical rig frame.
fn canonical_ray(
    frames: &CanonicalFrames,
    rig: &CameraRig,
    obs: &PointCorrespondence,
) -> (Vec3, Vec3) {
    let ext = &rig.cameras[obs.camera].extrinsic;
    let dir = frames.rig.rotation * (ext.rotation * obs.bearing);
    let center = frames.rig.transform_point(&ext.translation);
    (dir, center)
}

fn canonical_pose(rotation: crate::geometry::Mat3, translation: Vec3) -> RigidTransform {
    RigidTransform::new(
        rotation,
        translation,
        Frame::CanonicalRig,
        Frame::CanonicalWorld,
    )
}

/// Residual norm over every observation of a candidate, plus its flag.
fn finish_solution(
    pose: RigidTransform,
    rig: &CameraRig,
    points: &[(&PointCorrespondence, f64)],
    lines: &[&LineCorrespondence],
) -> PoseSolution {
    let mut sq = 0.0;
    for (obs, depth) in points {
        sq += point_residual(&pose, rig, obs, *depth).norm_squared();
    }
    for obs in lines {
        sq += line_residual(&pose, rig, obs).norm_squared();
    }
    let depths: Vec<f64> = points.iter().map(|(_, d)| *d).collect();
    PoseSolution {
        pose,
        cheirality_ok: depths.iter().all(|&d| d > 0.0),
        depths,
        residual_norm: sq.sqrt(),
    }
}

fn sort_by_residual(solutions: &mut [PoseSolution]) {
    solutions.sort_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm));
}
