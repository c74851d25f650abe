//! Pose error metrics and image-space distances used for scoring.

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

use crate::geometry::{is_rotation, CameraRig, Mat3, PluckerLine, RigidTransform, Vec3};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum MetricError {
    #[error("matrix is not a rotation")]
    InvalidRotation,
    #[error("degenerate image line")]
    InvalidLine,
}

const ROTATION_TOL: f64 = 1e-6;

/// Angle of `R_est R_gtᵀ` in degrees, in `[0, 180]`.
pub fn rotation_error_deg(r_est: &Mat3, r_gt: &Mat3) -> Result<f64, MetricError> {
    if !is_rotation(r_est, ROTATION_TOL) || !is_rotation(r_gt, ROTATION_TOL) {
        return Err(MetricError::InvalidRotation);
    }
    let delta = r_est * r_gt.transpose();
    let cos = ((delta.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    // acos loses precision near 0; use the skew part for small angles.
    let skew = Vec3::new(
        delta[(2, 1)] - delta[(1, 2)],
        delta[(0, 2)] - delta[(2, 0)],
        delta[(1, 0)] - delta[(0, 1)],
    );
    let sin = skew.norm() / 2.0;
    Ok(sin.atan2(cos).to_degrees().clamp(0.0, 180.0))
}

pub fn translation_error(t_est: &Vec3, t_gt: &Vec3) -> f64 {
    (t_est - t_gt).norm()
}

/// Homogeneous image line `a u + b v + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageLine {
    pub coeffs: Vector3<f64>,
}

impl ImageLine {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, MetricError> {
        let coeffs = Vector3::new(a, b, c);
        if !(a.hypot(b) > 1e-12 * coeffs.norm()) || !coeffs.iter().all(|x| x.is_finite()) {
            return Err(MetricError::InvalidLine);
        }
        Ok(Self { coeffs })
    }

    pub fn through(u1: &Vector2<f64>, u2: &Vector2<f64>) -> Result<Self, MetricError> {
        if (u1 - u2).norm() <= 1e-12 {
            return Err(MetricError::InvalidLine);
        }
        let l = Vector3::new(u1.x, u1.y, 1.0).cross(&Vector3::new(u2.x, u2.y, 1.0));
        Self::new(l.x, l.y, l.z)
    }

    /// Unit direction along the line.
    pub fn direction(&self) -> Vector2<f64> {
        Vector2::new(-self.coeffs.y, self.coeffs.x).normalize()
    }

    pub fn distance(&self, u: &Vector2<f64>) -> f64 {
        let l = &self.coeffs;
        (l.x * u.x + l.y * u.y + l.z).abs() / l.x.hypot(l.y)
    }
}

/// Acute angle between two image lines, radians in `[0, π/2]`.
pub fn line_angle(a: &ImageLine, b: &ImageLine) -> f64 {
    let (da, db) = (a.direction(), b.direction());
    let cross = (da.x * db.y - da.y * db.x).abs();
    let dot = da.dot(&db).abs();
    cross.atan2(dot)
}

/// `d_L = √(d(u1, l)² + d(u2, l)²) · exp(∠(u1u2, l))`.
pub fn line_reprojection_distance(
    u1: &Vector2<f64>,
    u2: &Vector2<f64>,
    line: &ImageLine,
) -> Result<f64, MetricError> {
    let observed = ImageLine::through(u1, u2)?;
    let d1 = line.distance(u1);
    let d2 = line.distance(u2);
    Ok(d1.hypot(d2) * line_angle(&observed, line).exp())
}

/// World → local-camera transform for camera `index` under rig pose `pose`.
pub fn world_to_camera(pose: &RigidTransform, rig: &CameraRig, index: usize) -> RigidTransform {
    pose.compose_unchecked(&rig.cameras[index].extrinsic)
        .inverse()
}

/// Pixel of a world point, `None` if it is not in front of the camera.
pub fn project_point(
    pose: &RigidTransform,
    rig: &CameraRig,
    index: usize,
    world: &Vec3,
) -> Option<Vector2<f64>> {
    let local = world_to_camera(pose, rig, index).transform_point(world);
    rig.cameras[index].intrinsics.project(&local)
}

/// Image of a world line: `K⁻ᵀ m` for the moment `m` in the camera frame.
pub fn project_line(
    pose: &RigidTransform,
    rig: &CameraRig,
    index: usize,
    world: &PluckerLine,
) -> Result<ImageLine, MetricError> {
    let local = world_to_camera(pose, rig, index).transform_line(world);
    let k = rig.cameras[index].intrinsics.matrix();
    let k_inv_t = k.try_inverse().ok_or(MetricError::InvalidLine)?.transpose();
    let l = k_inv_t * local.moment;
    ImageLine::new(l.x, l.y, l.z)
}

/// Pixel distance between the projection of `world` and `observed`;
/// infinite when the point is behind the camera.
pub fn point_reprojection_error(
    pose: &RigidTransform,
    rig: &CameraRig,
    index: usize,
    world: &Vec3,
    observed: &Vector2<f64>,
) -> f64 {
    project_point(pose, rig, index, world)
        .map(|p| (p - observed).norm())
        .unwrap_or(f64::INFINITY)
}
