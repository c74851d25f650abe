//! JSON instance files: a rig, point and line observations, and optionally
//! the ground-truth pose.

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use mppose_core::geometry::{
    interpretation_plane_from_bearings, is_rotation, CameraRig, Frame, Intrinsics,
    LineCorrespondence, Mat3, Plane, PluckerLine, PointCorrespondence, RigCamera, RigidTransform,
    Vec3,
};
use mppose_core::sim::SyntheticScene;

/// Largest orthonormality error accepted for a rotation read from a file.
pub const ROTATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Parse or validation failure with the JSON path and position.
    #[error("{0}")]
    Schema(String),
}

/// Row-major 3×3 rotation, checked when read.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Rotation(pub Mat3);

impl TryFrom<[f64; 9]> for Rotation {
    type Error = String;

    fn try_from(v: [f64; 9]) -> Result<Self, String> {
        let m = Mat3::from_row_slice(&v);
        if !is_rotation(&m, ROTATION_TOL) {
            let err = (m.transpose() * m - Mat3::identity()).amax();
            return Err(format!(
                "not a rotation matrix (|RᵀR − I| = {err:.3e}, det = {:.6})",
                m.determinant()
            ));
        }
        Ok(Self(m))
    }
}

impl From<Rotation> for [f64; 9] {
    fn from(r: Rotation) -> Self {
        let m = r.0;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraEntry {
    /// Camera → rig rotation.
    pub rotation: Rotation,
    /// Camera center in the rig frame.
    pub translation: [f64; 3],
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointEntry {
    pub cam: usize,
    pub world: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bearing: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineEntry {
    pub cam: usize,
    pub world_direction: [f64; 3],
    pub world_moment: [f64; 3],
    /// Interpretation plane normal in the camera frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_normal: Option<[f64; 3]>,
    /// `[u1, v1, u2, v2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pixel_endpoints: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseEntry {
    /// Rig → world rotation.
    pub rotation: Rotation,
    pub translation: [f64; 3],
}

impl PoseEntry {
    pub fn from_transform(t: &RigidTransform) -> Self {
        Self {
            rotation: Rotation(t.rotation),
            translation: t.translation.into(),
        }
    }

    pub fn to_transform(&self) -> RigidTransform {
        RigidTransform::new(
            self.rotation.0,
            self.translation.into(),
            Frame::Rig,
            Frame::World,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub rig: Vec<CameraEntry>,
    #[serde(default)]
    pub points: Vec<PointEntry>,
    #[serde(default)]
    pub lines: Vec<LineEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<PoseEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_px: Option<f64>,
}

/// An instance converted to solver types.
#[derive(Debug, Clone)]
pub struct Instance {
    pub rig: CameraRig,
    pub points: Vec<PointCorrespondence>,
    pub lines: Vec<LineCorrespondence>,
    pub ground_truth: Option<RigidTransform>,
    /// Non-fatal remarks, e.g. a pixel overriding a bearing.
    pub warnings: Vec<String>,
}

fn schema(msg: impl Into<String>) -> InstanceError {
    InstanceError::Schema(msg.into())
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            schema(format!("{path}: {inner}"))
        })
    }

    pub fn read(path: &Path) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Pretty JSON with a trailing newline; stable under read → write.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), InstanceError> {
        std::fs::write(path, self.to_json()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Observations as pixels, the form the simulator produces.
    pub fn from_scene(scene: &SyntheticScene) -> Self {
        let rig = scene
            .rig
            .cameras
            .iter()
            .map(|c| CameraEntry {
                rotation: Rotation(c.extrinsic.rotation),
                translation: c.extrinsic.translation.into(),
                fx: c.intrinsics.fx,
                fy: c.intrinsics.fy,
                cx: c.intrinsics.cx,
                cy: c.intrinsics.cy,
                width: c.intrinsics.width,
                height: c.intrinsics.height,
            })
            .collect();
        let points = scene
            .points
            .iter()
            .map(|p| PointEntry {
                cam: p.correspondence.camera,
                world: p.correspondence.world.into(),
                bearing: None,
                pixel: Some(p.pixel.into()),
            })
            .collect();
        let lines = scene
            .lines
            .iter()
            .map(|l| {
                let c = &l.correspondence;
                LineEntry {
                    cam: c.camera,
                    world_direction: c.world.direction.into(),
                    world_moment: c.world.moment.into(),
                    plane_normal: match c.pixel_endpoints {
                        Some(_) => None,
                        None => Some(c.plane.normal.into()),
                    },
                    pixel_endpoints: c.pixel_endpoints.map(|[a, b]| [a.x, a.y, b.x, b.y]),
                }
            })
            .collect();
        Self {
            rig,
            points,
            lines,
            ground_truth: Some(PoseEntry::from_transform(&scene.ground_truth)),
            seed: Some(scene.seed),
            noise_px: Some(scene.noise_px),
        }
    }

    /// Validates indices and geometry and builds solver inputs.
    pub fn to_instance(&self) -> Result<Instance, InstanceError> {
        let mut warnings = Vec::new();
        let cameras = self
            .rig
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if !(c.fx > 0.0 && c.fy > 0.0) || c.width == 0 || c.height == 0 {
                    return Err(schema(format!(
                        "rig[{i}]: focal lengths and image size must be positive"
                    )));
                }
                Ok(RigCamera {
                    extrinsic: RigidTransform::new(
                        c.rotation.0,
                        c.translation.into(),
                        Frame::Camera(i),
                        Frame::Rig,
                    ),
                    intrinsics: Intrinsics {
                        fx: c.fx,
                        fy: c.fy,
                        cx: c.cx,
                        cy: c.cy,
                        width: c.width,
                        height: c.height,
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let rig = CameraRig::new(cameras).map_err(|e| schema(format!("rig: {e}")))?;
        let intrinsics = |what: &str, cam: usize| {
            rig.camera(cam).map(|c| c.intrinsics).ok_or_else(|| {
                schema(format!(
                    "{what}.cam: camera {cam} not in rig of {} cameras",
                    rig.len()
                ))
            })
        };

        let mut points = Vec::with_capacity(self.points.len());
        for (j, p) in self.points.iter().enumerate() {
            let what = format!("points[{j}]");
            let k = intrinsics(&what, p.cam)?;
            let bearing = match (p.pixel, p.bearing) {
                (Some(px), b) => {
                    if b.is_some() {
                        warnings.push(format!("{what}: both pixel and bearing given, using pixel"));
                    }
                    k.bearing(&Vector2::from(px))
                }
                (None, Some(b)) => {
                    let b = Vec3::from(b);
                    if !(b.norm() > 1e-12) {
                        return Err(schema(format!("{what}.bearing: zero vector")));
                    }
                    b.normalize()
                }
                (None, None) => return Err(schema(format!("{what}: needs `bearing` or `pixel`"))),
            };
            points.push(PointCorrespondence {
                camera: p.cam,
                world: p.world.into(),
                bearing,
            });
        }

        let mut lines = Vec::with_capacity(self.lines.len());
        for (j, l) in self.lines.iter().enumerate() {
            let what = format!("lines[{j}]");
            let k = intrinsics(&what, l.cam)?;
            let world = PluckerLine::from_raw(&l.world_direction.into(), &l.world_moment.into())
                .map_err(|e| schema(format!("{what}.world_direction: {e}")))?;
            let (plane, pixel_endpoints) = match (l.pixel_endpoints, l.plane_normal) {
                (Some([u1, v1, u2, v2]), n) => {
                    if n.is_some() {
                        warnings.push(format!(
                            "{what}: both pixel_endpoints and plane_normal given, using pixels"
                        ));
                    }
                    let (a, b) = (Vector2::new(u1, v1), Vector2::new(u2, v2));
                    let plane = interpretation_plane_from_bearings(&k.bearing(&a), &k.bearing(&b))
                        .map_err(|e| schema(format!("{what}.pixel_endpoints: {e}")))?;
                    (plane, Some([a, b]))
                }
                (None, Some(n)) => {
                    let n = Vec3::from(n);
                    if !(n.norm() > 1e-12) {
                        return Err(schema(format!("{what}.plane_normal: zero vector")));
                    }
                    (
                        Plane {
                            normal: n.normalize(),
                            offset: 0.0,
                        },
                        None,
                    )
                }
                (None, None) => {
                    return Err(schema(format!(
                        "{what}: needs `plane_normal` or `pixel_endpoints`"
                    )))
                }
            };
            lines.push(LineCorrespondence {
                camera: l.cam,
                world,
                plane,
                pixel_endpoints,
            });
        }

        Ok(Instance {
            rig,
            points,
            lines,
            ground_truth: self.ground_truth.as_ref().map(PoseEntry::to_transform),
            warnings,
        })
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    InstanceFile::read(path)?.to_instance()
}
