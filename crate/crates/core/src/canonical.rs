//! Predefined world and rig transforms that move a minimal problem into the
//! frames both solvers are written in:
//!
//! * canonical world: the first line is the y-axis and the first point sits on
//!   the z-axis, `p2 = (0, 0, z)`;
//! * canonical rig: the camera observing the first line is at the origin and its
//!   interpretation plane is `z = 0`.
//!
//! A pose `T̂` found in canonical frames maps back through
//! `T_CW = T̃1⁻¹ · T̂ · T̃2`.

use thiserror::Error;

use crate::geometry::{Frame, GeometryError, Mat3, Plane, PluckerLine, RigidTransform, Vec3};

/// Minimum distance between the first point and the first line.
pub const POINT_ON_LINE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonicalError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// World → canonical-world transform `T̃1` built from the first line and the
/// first point.
pub fn world_canonical_transform(
    line: &PluckerLine,
    p2: &Vec3,
) -> Result<RigidTransform, CanonicalError> {
    let dir = line.direction.normalize();
    let q1 = line.closest_point_to_origin();
    let r1 = dir.cross(&(p2 - q1));
    let dist = r1.norm();
    if !(dist > POINT_ON_LINE_TOL) {
        return Err(CanonicalError::DegenerateConfiguration(
            "point lies on the line",
        ));
    }
    let r1 = r1 / dist;
    let r2 = dir;
    let r3 = r1.cross(&r2);
    let rotation = Mat3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    let rq = rotation * q1;
    let lambda = (rotation * p2).y - rq.y;
    let translation = -(rq + Vec3::new(0.0, lambda, 0.0));
    Ok(RigidTransform::new(
        rotation,
        translation,
        Frame::World,
        Frame::CanonicalWorld,
    ))
}

/// Rig → canonical-rig transform `T̃2` from the first interpretation plane
/// (rig frame) and the center `c1` of the camera that observed it.
pub fn camera_canonical_transform(
    plane: &Plane,
    c1: &Vec3,
) -> Result<RigidTransform, CanonicalError> {
    let n = plane.normal.norm();
    if !(n > 1e-12) {
        return Err(GeometryError::DegenerateInput("zero plane normal").into());
    }
    let r3 = plane.normal / n;
    let ex = Vec3::x().cross(&r3);
    let ey = Vec3::y().cross(&r3);
    // Ties go to e_y so that an already canonical plane maps through the identity.
    let e = if ex.norm() > ey.norm() + 1e-12 {
        ex
    } else {
        ey
    };
    let r1 = e.normalize();
    let r2 = r3.cross(&r1);
    let rotation = Mat3::from_rows(&[r1.transpose(), r2.transpose(), r3.transpose()]);
    Ok(RigidTransform::new(
        rotation,
        -(rotation * c1),
        Frame::Rig,
        Frame::CanonicalRig,
    ))
}

/// `T_CW = T̃1⁻¹ · T̂ · T̃2`.
pub fn decanonicalize(
    canonical_pose: &RigidTransform,
    world_to_canonical: &RigidTransform,
    rig_to_canonical: &RigidTransform,
) -> Result<RigidTransform, GeometryError> {
    world_to_canonical
        .inverse()
        .compose(canonical_pose)?
        .compose(rig_to_canonical)
}

/// Both predefined transforms of a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFrames {
    pub world: RigidTransform,
    pub rig: RigidTransform,
}

impl CanonicalFrames {
    pub fn new(
        line_world: &PluckerLine,
        p2_world: &Vec3,
        plane_rig: &Plane,
        c1_rig: &Vec3,
    ) -> Result<Self, CanonicalError> {
        Ok(Self {
            world: world_canonical_transform(line_world, p2_world)?,
            rig: camera_canonical_transform(plane_rig, c1_rig)?,
        })
    }

    /// Hot-loop variant of [`decanonicalize`]; frames are known to chain.
    pub fn pose_from_canonical(&self, canonical_pose: &RigidTransform) -> RigidTransform {
        self.world
            .inverse()
            .compose_unchecked(canonical_pose)
            .compose_unchecked(&self.rig)
    }

    pub fn pose_to_canonical(&self, pose: &RigidTransform) -> RigidTransform {
        self.world
            .compose_unchecked(pose)
            .compose_unchecked(&self.rig.inverse())
    }
}

/// Rotation of the two-angle form used in canonical frames:
/// `[[cθ,0,−sθ],[0,1,0],[sθ,0,cθ]] · [[cα,sα,0],[−sα,cα,0],[0,0,1]]`.
pub fn two_angle_rotation(c_theta: f64, s_theta: f64, c_alpha: f64, s_alpha: f64) -> Mat3 {
    Mat3::new(
        c_theta * c_alpha,
        c_theta * s_alpha,
        -s_theta,
        -s_alpha,
        c_alpha,
        0.0,
        s_theta * c_alpha,
        s_theta * s_alpha,
        c_theta,
    )
}

/// Inverse of [`two_angle_rotation`] for a rotation of that form: `(θ, α)`.
pub fn two_angle_decompose(r: &Mat3) -> (f64, f64) {
    let theta = (-r[(0, 2)]).atan2(r[(2, 2)]);
    let alpha = (-r[(1, 0)]).atan2(r[(1, 1)]);
    (theta, alpha)
}
