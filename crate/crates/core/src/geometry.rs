//! Frames, rigid transforms, Plücker lines, interpretation planes and the
//! point/line pose residuals shared by the solvers and their tests.

use std::fmt;

use nalgebra::{Matrix3, Matrix4, Vector2, Vector3, Vector4};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// Coordinate frame label carried by every [`RigidTransform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    World,
    /// The rig (global camera) frame `C`.
    Rig,
    /// Local frame of the i-th camera of the rig.
    Camera(usize),
    CanonicalWorld,
    CanonicalRig,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::World => write!(f, "world"),
            Frame::Rig => write!(f, "rig"),
            Frame::Camera(i) => write!(f, "camera[{i}]"),
            Frame::CanonicalWorld => write!(f, "canonical-world"),
            Frame::CanonicalRig => write!(f, "canonical-rig"),
        }
    }
}

/// Rotation + translation mapping coordinates in `from` to coordinates in `to`:
/// `x_to = rotation * x_from + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
    pub from: Frame,
    pub to: Frame,
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: Vec3, from: Frame, to: Frame) -> Self {
        Self {
            rotation,
            translation,
            from,
            to,
        }
    }

    pub fn identity(frame: Frame) -> Self {
        Self::new(Mat3::identity(), Vec3::zeros(), frame, frame)
    }

    /// Identity map relabelled between two distinct frames.
    pub fn identity_between(from: Frame, to: Frame) -> Self {
        Self::new(Mat3::identity(), Vec3::zeros(), from, to)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation), self.to, self.from)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> Result<RigidTransform, GeometryError> {
        if self.from != other.to {
            return Err(GeometryError::FrameMismatch {
                expected: self.from,
                found: other.to,
            });
        }
        Ok(self.compose_unchecked(other))
    }

    /// Composition without the frame check, for use inside solver loops.
    pub fn compose_unchecked(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
            other.from,
            self.to,
        )
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Moves a line rigidly: `l' = R l`, `m' = R m + t × (R l)`.
    pub fn transform_line(&self, line: &PluckerLine) -> PluckerLine {
        let direction = self.rotation * line.direction;
        let moment = self.rotation * line.moment + self.translation.cross(&direction);
        PluckerLine { direction, moment }
    }

    /// Maps a plane given in `from` coordinates to `to` coordinates (`T⁻ᵀ Π`).
    pub fn transform_plane(&self, plane: &Plane) -> Plane {
        let normal = self.rotation * plane.normal;
        Plane {
            normal,
            offset: plane.offset - normal.dot(&self.translation),
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Frobenius norm of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Mat3::identity()).norm()
    }

    pub fn is_rotation(&self, tol: f64) -> bool {
        is_rotation(&self.rotation, tol)
    }
}

pub fn is_rotation(r: &Mat3, tol: f64) -> bool {
    r.iter().all(|v| v.is_finite())
        && (r.transpose() * r - Mat3::identity()).norm() <= tol
        && (r.determinant() - 1.0).abs() <= tol
}

/// Free function form of [`RigidTransform::compose`].
pub fn compose(a: &RigidTransform, b: &RigidTransform) -> Result<RigidTransform, GeometryError> {
    a.compose(b)
}

pub fn invert(t: &RigidTransform) -> RigidTransform {
    t.inverse()
}

pub fn transform_point(t: &RigidTransform, p: &Vec3) -> Vec3 {
    t.transform_point(p)
}

pub fn transform_line(t: &RigidTransform, line: &PluckerLine) -> PluckerLine {
    t.transform_line(line)
}

/// 3D line in Plücker coordinates with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerLine {
    pub direction: Vec3,
    pub moment: Vec3,
}

impl PluckerLine {
    /// Builds a line from a direction (normalized here) and a point on it.
    pub fn from_point_direction(point: &Vec3, direction: &Vec3) -> Result<Self, GeometryError> {
        let n = direction.norm();
        if !(n > 1e-12) {
            return Err(GeometryError::DegenerateInput("zero line direction"));
        }
        let direction = direction / n;
        Ok(Self {
            direction,
            moment: point.cross(&direction),
        })
    }

    /// Normalizes raw (direction, moment) coordinates so the direction is unit
    /// and the moment orthogonal to it.
    pub fn from_raw(direction: &Vec3, moment: &Vec3) -> Result<Self, GeometryError> {
        let n = direction.norm();
        if !(n > 1e-12) {
            return Err(GeometryError::DegenerateInput("zero line direction"));
        }
        let d = direction / n;
        let m = moment / n;
        Ok(Self {
            direction: d,
            moment: m - d * d.dot(&m),
        })
    }

    /// Point of the line closest to the origin.
    pub fn closest_point_to_origin(&self) -> Vec3 {
        self.direction.cross(&self.moment)
    }

    pub fn distance_to_point(&self, p: &Vec3) -> f64 {
        (p.cross(&self.direction) - self.moment).norm()
    }

    /// 4×4 Plücker matrix `[[m̂, l], [lᵀ, 0]]`.
    pub fn plucker_matrix(&self) -> Matrix4<f64> {
        let m = self.moment;
        let l = self.direction;
        Matrix4::new(
            0.0, -m.z, m.y, l.x, //
            m.z, 0.0, -m.x, l.y, //
            -m.y, m.x, 0.0, l.z, //
            l.x, l.y, l.z, 0.0,
        )
    }
}

pub fn plucker_from_points(q1: &Vec3, q2: &Vec3) -> Result<PluckerLine, GeometryError> {
    let diff = q2 - q1;
    let n = diff.norm();
    if !(n > 1e-12) {
        return Err(GeometryError::DegenerateInput("coincident points"));
    }
    let direction = diff / n;
    Ok(PluckerLine {
        direction,
        moment: q1.cross(&direction),
    })
}

/// Plane `normal · x + offset = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.normal.x, self.normal.y, self.normal.z, self.offset)
    }
}

/// Image of a line: the plane through a camera center spanned by the line's
/// back-projected rays. Stored in the camera's local frame, so the offset is zero.
pub type InterpretationPlane = Plane;

pub fn interpretation_plane_from_bearings(
    d1: &Vec3,
    d2: &Vec3,
) -> Result<InterpretationPlane, GeometryError> {
    let n = d1.cross(d2);
    let norm = n.norm();
    if !(norm > 1e-10) {
        return Err(GeometryError::DegenerateInput("parallel bearings"));
    }
    Ok(Plane {
        normal: n / norm,
        offset: 0.0,
    })
}

/// Pinhole intrinsics (no skew, no distortion).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Intrinsics {
    pub fn matrix(&self) -> Mat3 {
        Mat3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Unit bearing of a pixel.
    pub fn bearing(&self, pixel: &Vector2<f64>) -> Vec3 {
        Vec3::new(
            (pixel.x - self.cx) / self.fx,
            (pixel.y - self.cy) / self.fy,
            1.0,
        )
        .normalize()
    }

    /// Projects a point in the camera frame; `None` when it is not in front.
    pub fn project(&self, p: &Vec3) -> Option<Vector2<f64>> {
        if !(p.z > 0.0) {
            return None;
        }
        Some(Vector2::new(
            self.fx * p.x / p.z + self.cx,
            self.fy * p.y / p.z + self.cy,
        ))
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x <= self.width as f64
            && pixel.y <= self.height as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigCamera {
    /// `T_{Ci,C}`: camera-local to rig coordinates.
    pub extrinsic: RigidTransform,
    pub intrinsics: Intrinsics,
}

impl RigCamera {
    pub fn center(&self) -> Vec3 {
        self.extrinsic.translation
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    pub cameras: Vec<RigCamera>,
}

impl CameraRig {
    pub fn new(cameras: Vec<RigCamera>) -> Result<Self, GeometryError> {
        if cameras.is_empty() {
            return Err(GeometryError::DegenerateInput("rig without cameras"));
        }
        if cameras.iter().any(|c| !c.extrinsic.is_rotation(1e-9)) {
            return Err(GeometryError::DegenerateInput(
                "camera extrinsic is not a rotation",
            ));
        }
        Ok(Self { cameras })
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn camera(&self, index: usize) -> Option<&RigCamera> {
        self.cameras.get(index)
    }
}

/// 3D point and its bearing in the observing camera's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCorrespondence {
    pub camera: usize,
    pub world: Vec3,
    pub bearing: Vec3,
}

/// 3D line and its interpretation plane in the observing camera's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCorrespondence {
    pub camera: usize,
    pub world: PluckerLine,
    pub plane: InterpretationPlane,
    /// Observed segment endpoints in pixels, when known. Used for robust scoring.
    pub pixel_endpoints: Option<[Vector2<f64>; 2]>,
}

/// `T_CW (δ R_{Ci,C} d + c_i) − p`.
pub fn point_residual(
    pose: &RigidTransform,
    rig: &CameraRig,
    obs: &PointCorrespondence,
    depth: f64,
) -> Vec3 {
    let cam = &rig.cameras[obs.camera];
    let in_rig = cam.extrinsic.transform_point(&(obs.bearing * depth));
    pose.transform_point(&in_rig) - obs.world
}

/// `L_W T_CW⁻ᵀ T_{Ci,C}⁻ᵀ Π`, zero when the world line lies in the plane.
pub fn line_residual(
    pose: &RigidTransform,
    rig: &CameraRig,
    obs: &LineCorrespondence,
) -> Vector4<f64> {
    let cam = &rig.cameras[obs.camera];
    let plane_world = pose.transform_plane(&cam.extrinsic.transform_plane(&obs.plane));
    obs.world.plucker_matrix() * plane_world.as_vector()
}

/// Rotation by `angle` radians about a unit `axis`.
pub fn axis_angle(axis: &Vec3, angle: f64) -> Mat3 {
    let axis = nalgebra::Unit::new_normalize(*axis);
    *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix()
}
