//! Synthetic scenes with known ground truth.
//!
//! Features are generated image-first: a pixel is drawn in some camera, pushed
//! out to a random depth along its ray and mapped to the world through the
//! ground-truth pose. Observations then get Gaussian pixel noise.

use nalgebra::{Quaternion, UnitQuaternion, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::geometry::{
    interpretation_plane_from_bearings, plucker_from_points, CameraRig, Frame, Intrinsics,
    LineCorrespondence, Mat3, PointCorrespondence, RigCamera, RigidTransform, Vec3,
};
use crate::solver::{P1L2Problem, P2L1Problem};

const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scene config: {0}")]
    InvalidConfig(String),
    #[error("scene generation failed: {0}")]
    Generation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub n_cameras: usize,
    pub n_points: usize,
    pub n_lines: usize,
    /// Standard deviation of the per-coordinate pixel noise.
    pub noise_px: f64,
    /// Range of Euclidean depths along the viewing rays.
    pub depth_range: (f64, f64),
    /// Radius of the ball holding the camera centers, in the rig frame.
    pub rig_radius: f64,
    /// Half-width of the cube holding the ground-truth translation.
    pub translation_range: f64,
    /// All cameras share one extrinsic.
    pub central: bool,
    /// Minimum pixel length of a line segment.
    pub min_segment_px: f64,
    pub intrinsics: Intrinsics,
    pub seed: u64,
}

pub const DEFAULT_INTRINSICS: Intrinsics = Intrinsics {
    fx: 800.0,
    fy: 800.0,
    cx: 640.0,
    cy: 512.0,
    width: 1280,
    height: 1024,
};

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_cameras: 3,
            n_points: 2,
            n_lines: 1,
            noise_px: 0.0,
            depth_range: (2.0, 10.0),
            rig_radius: 1.0,
            translation_range: 2.0,
            central: false,
            min_segment_px: 100.0,
            intrinsics: DEFAULT_INTRINSICS,
            seed: 0,
        }
    }
}

impl SceneConfig {
    /// Just enough features for one two-point/one-line problem.
    pub fn p2l1(seed: u64) -> Self {
        Self {
            n_points: 2,
            n_lines: 1,
            seed,
            ..Self::default()
        }
    }

    /// Just enough features for one one-point/two-line problem.
    pub fn p1l2(seed: u64) -> Self {
        Self {
            n_points: 1,
            n_lines: 2,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.n_cameras == 0 {
            return bad("n_cameras must be at least 1");
        }
        if !(self.noise_px >= 0.0) || !self.noise_px.is_finite() {
            return bad("noise_px must be a non-negative number");
        }
        let (lo, hi) = self.depth_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad("depth_range must satisfy 0 < min <= max");
        }
        if !(self.rig_radius >= 0.0) || !(self.translation_range >= 0.0) {
            return bad("rig_radius and translation_range must be non-negative");
        }
        let k = &self.intrinsics;
        if !(k.fx > 0.0 && k.fy > 0.0) || k.width == 0 || k.height == 0 {
            return bad("intrinsics need positive focal lengths and image size");
        }
        if !(self.min_segment_px >= 0.0)
            || self.min_segment_px >= (k.width as f64).hypot(k.height as f64)
        {
            return bad("min_segment_px must fit inside the image");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPoint {
    pub correspondence: PointCorrespondence,
    /// True depth along the noiseless bearing.
    pub depth: f64,
    /// Observed (noisy) pixel.
    pub pixel: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLine {
    /// Carries the noisy endpoint pixels in `pixel_endpoints`.
    pub correspondence: LineCorrespondence,
    pub endpoints: [Vec3; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    /// `T_GT`: rig → world.
    pub ground_truth: RigidTransform,
    pub rig: CameraRig,
    pub points: Vec<SyntheticPoint>,
    pub lines: Vec<SyntheticLine>,
    pub noise_px: f64,
    pub seed: u64,
}

/// Camera observing the `j`-th point.
pub fn point_camera(j: usize, n_cameras: usize) -> usize {
    (j + 1) % n_cameras
}

/// Camera observing the `j`-th line.
pub fn line_camera(j: usize, n_cameras: usize) -> usize {
    (2 * j) % n_cameras
}

/// SplitMix64 step: independent per-trial seeds from one base seed.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    *UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]))
        .to_rotation_matrix()
        .matrix()
}

fn random_in_ball(rng: &mut impl Rng, radius: f64) -> Vec3 {
    if radius == 0.0 {
        return Vec3::zeros();
    }
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        if v.norm_squared() <= 1.0 {
            return v * radius;
        }
    }
}

fn random_pixel(rng: &mut impl Rng, k: &Intrinsics) -> Vector2<f64> {
    Vector2::new(
        rng.random_range(0.0..k.width as f64),
        rng.random_range(0.0..k.height as f64),
    )
}

fn random_depth(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

struct Generator<'a> {
    config: &'a SceneConfig,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
}

impl Generator<'_> {
    fn noisy(&mut self, pixel: &Vector2<f64>, k: &Intrinsics) -> Result<Vector2<f64>, SimError> {
        if self.config.noise_px == 0.0 {
            return Ok(*pixel);
        }
        for _ in 0..MAX_ATTEMPTS {
            let p = pixel
                + Vector2::new(
                    self.noise.sample(&mut self.rng),
                    self.noise.sample(&mut self.rng),
                );
            if k.contains(&p) {
                return Ok(p);
            }
        }
        Err(SimError::Generation(
            "noisy pixel left the image after 100 attempts".into(),
        ))
    }

    /// A world point seen by `camera`: (pixel, unit bearing, depth, world point).
    fn feature(
        &mut self,
        rig: &CameraRig,
        gt: &RigidTransform,
        camera: usize,
    ) -> (Vector2<f64>, Vec3, f64, Vec3) {
        let cam = &rig.cameras[camera];
        let pixel = random_pixel(&mut self.rng, &cam.intrinsics);
        let bearing = cam.intrinsics.bearing(&pixel);
        let depth = random_depth(&mut self.rng, self.config.depth_range);
        let world = gt.transform_point(&cam.extrinsic.transform_point(&(bearing * depth)));
        (pixel, bearing, depth, world)
    }
}

/// Generates a scene; identical configs give identical scenes.
pub fn generate_scene(config: &SceneConfig) -> Result<SyntheticScene, SimError> {
    config.validate()?;
    let mut g = Generator {
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        noise: Normal::new(0.0, config.noise_px.max(f64::MIN_POSITIVE))
            .map_err(|e| SimError::InvalidConfig(e.to_string()))?,
    };

    let mut cameras = Vec::with_capacity(config.n_cameras);
    for i in 0..config.n_cameras {
        let extrinsic = if config.central && i > 0 {
            cameras.first().map(|c: &RigCamera| c.extrinsic).unwrap()
        } else {
            RigidTransform::new(
                random_rotation(&mut g.rng),
                random_in_ball(&mut g.rng, config.rig_radius),
                Frame::Camera(i),
                Frame::Rig,
            )
        };
        let extrinsic = RigidTransform {
            from: Frame::Camera(i),
            ..extrinsic
        };
        cameras.push(RigCamera {
            extrinsic,
            intrinsics: config.intrinsics,
        });
    }
    let rig = CameraRig::new(cameras).map_err(|e| SimError::Generation(e.to_string()))?;
    let r = config.translation_range;
    let gt_t = if r > 0.0 {
        Vec3::new(
            g.rng.random_range(-r..=r),
            g.rng.random_range(-r..=r),
            g.rng.random_range(-r..=r),
        )
    } else {
        Vec3::zeros()
    };
    let ground_truth =
        RigidTransform::new(random_rotation(&mut g.rng), gt_t, Frame::Rig, Frame::World);

    let mut points = Vec::with_capacity(config.n_points);
    for j in 0..config.n_points {
        let camera = point_camera(j, config.n_cameras);
        let (pixel, bearing, depth, world) = g.feature(&rig, &ground_truth, camera);
        let k = rig.cameras[camera].intrinsics;
        let observed = g.noisy(&pixel, &k)?;
        let bearing = if config.noise_px == 0.0 {
            bearing
        } else {
            k.bearing(&observed)
        };
        points.push(SyntheticPoint {
            correspondence: PointCorrespondence {
                camera,
                world,
                bearing,
            },
            depth,
            pixel: observed,
        });
    }

    let mut lines = Vec::with_capacity(config.n_lines);
    for j in 0..config.n_lines {
        let camera = line_camera(j, config.n_cameras);
        let k = rig.cameras[camera].intrinsics;
        let mut ends = None;
        for _ in 0..MAX_ATTEMPTS {
            let a = g.feature(&rig, &ground_truth, camera);
            let b = g.feature(&rig, &ground_truth, camera);
            if (a.0 - b.0).norm() >= config.min_segment_px {
                ends = Some((a, b));
                break;
            }
        }
        let (a, b) = ends.ok_or_else(|| {
            SimError::Generation("no long enough line segment after 100 attempts".into())
        })?;
        let ua = g.noisy(&a.0, &k)?;
        let ub = g.noisy(&b.0, &k)?;
        let plane = interpretation_plane_from_bearings(&k.bearing(&ua), &k.bearing(&ub))
            .map_err(|e| SimError::Generation(e.to_string()))?;
        let world =
            plucker_from_points(&a.3, &b.3).map_err(|e| SimError::Generation(e.to_string()))?;
        lines.push(SyntheticLine {
            correspondence: LineCorrespondence {
                camera,
                world,
                plane,
                pixel_endpoints: Some([ua, ub]),
            },
            endpoints: [a.3, b.3],
        });
    }

    Ok(SyntheticScene {
        ground_truth,
        rig,
        points,
        lines,
        noise_px: config.noise_px,
        seed: config.seed,
    })
}

impl SyntheticScene {
    pub fn point_correspondences(&self) -> Vec<PointCorrespondence> {
        self.points.iter().map(|p| p.correspondence).collect()
    }

    pub fn line_correspondences(&self) -> Vec<LineCorrespondence> {
        self.lines.iter().map(|l| l.correspondence).collect()
    }

    /// Largest distance from the rig origin to any feature, at least 1.
    pub fn scale(&self) -> f64 {
        let o = self.ground_truth.translation;
        self.points
            .iter()
            .map(|p| (p.correspondence.world - o).norm())
            .chain(
                self.lines
                    .iter()
                    .flat_map(|l| l.endpoints.iter().map(|e| (e - o).norm())),
            )
            .fold(1.0, f64::max)
    }

    /// Problem built from line `line`, and points `p2`, `p3`.
    pub fn p2l1_problem(&self, line: usize, p2: usize, p3: usize) -> P2L1Problem<'_> {
        P2L1Problem {
            rig: &self.rig,
            line: self.lines[line].correspondence,
            point2: self.points[p2].correspondence,
            point3: self.points[p3].correspondence,
        }
    }

    /// Problem built from lines `l1`, `l3` and point `p2`.
    pub fn p1l2_problem(&self, l1: usize, p2: usize, l3: usize) -> P1L2Problem<'_> {
        P1L2Problem {
            rig: &self.rig,
            line1: self.lines[l1].correspondence,
            point2: self.points[p2].correspondence,
            line3: self.lines[l3].correspondence,
        }
    }

    /// Replaces the world geometry of a random `fraction` of all features with
    /// that of fresh, unrelated features. Returns which points and lines were
    /// corrupted.
    pub fn add_outliers(&mut self, fraction: f64, seed: u64) -> (Vec<bool>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_p = self.points.len();
        let total = n_p + self.lines.len();
        let count = ((fraction.clamp(0.0, 1.0) * total as f64).round() as usize).min(total);
        let chosen = rand::seq::index::sample(&mut rng, total, count);
        let mut point_out = vec![false; n_p];
        let mut line_out = vec![false; self.lines.len()];
        let config = SceneConfig::default();
        let mut g = Generator {
            config: &config,
            rng,
            noise: Normal::new(0.0, 1.0).unwrap(),
        };
        let n_cams = self.rig.len();
        for idx in chosen.iter() {
            let camera = g.rng.random_range(0..n_cams);
            if idx < n_p {
                let (.., world) = g.feature(&self.rig, &self.ground_truth, camera);
                self.points[idx].correspondence.world = world;
                point_out[idx] = true;
            } else {
                let l = idx - n_p;
                let a = g.feature(&self.rig, &self.ground_truth, camera).3;
                let mut b = g.feature(&self.rig, &self.ground_truth, camera).3;
                while (a - b).norm() < 1e-6 {
                    b = g.feature(&self.rig, &self.ground_truth, camera).3;
                }
                self.lines[l].correspondence.world = plucker_from_points(&a, &b).unwrap();
                self.lines[l].endpoints = [a, b];
                line_out[l] = true;
            }
        }
        (point_out, line_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{line_residual, point_residual};
    use crate::metrics::point_reprojection_error;

    #[test]
    fn noiseless_scene_has_zero_residuals() {
        for seed in 0..50 {
            let scene = generate_scene(&SceneConfig {
                n_points: 10,
                n_lines: 10,
                n_cameras: 4,
                seed,
                ..SceneConfig::default()
            })
            .unwrap();
            for p in &scene.points {
                assert!(p.depth > 0.0);
                let r = point_residual(&scene.ground_truth, &scene.rig, &p.correspondence, p.depth);
                assert!(r.norm() <= 1e-10 * scene.scale(), "{}", r.norm());
            }
            for l in &scene.lines {
                let r = line_residual(&scene.ground_truth, &scene.rig, &l.correspondence);
                assert!(r.norm() <= 1e-10 * scene.scale(), "{}", r.norm());
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let c = SceneConfig {
            n_points: 5,
            n_lines: 5,
            noise_px: 1.0,
            seed: 99,
            ..SceneConfig::default()
        };
        assert_eq!(generate_scene(&c).unwrap(), generate_scene(&c).unwrap());
        let other = generate_scene(&SceneConfig { seed: 100, ..c }).unwrap();
        assert_ne!(generate_scene(&c).unwrap(), other);
    }

    #[test]
    fn noise_level_matches_model() {
        // Each pixel gets N(0, σ²) per coordinate, so the reprojection error
        // is Rayleigh with mean σ·√(π/2) ≈ 2.51 for σ = 2.
        let scene = generate_scene(&SceneConfig {
            n_points: 1000,
            n_lines: 0,
            noise_px: 2.0,
            seed: 5,
            ..SceneConfig::default()
        })
        .unwrap();
        let mean: f64 = scene
            .points
            .iter()
            .map(|p| {
                point_reprojection_error(
                    &scene.ground_truth,
                    &scene.rig,
                    p.correspondence.camera,
                    &p.correspondence.world,
                    &p.pixel,
                )
            })
            .sum::<f64>()
            / 1000.0;
        assert!((1.0..=4.0).contains(&mean), "{mean}");
        let rayleigh = 2.0 * (std::f64::consts::PI / 2.0).sqrt();
        assert!((mean - rayleigh).abs() < 0.15, "{mean} vs {rayleigh}");
    }

    #[test]
    fn central_rig_shares_extrinsics() {
        let scene = generate_scene(&SceneConfig {
            central: true,
            seed: 3,
            ..SceneConfig::default()
        })
        .unwrap();
        let e0 = scene.rig.cameras[0].extrinsic;
        for c in &scene.rig.cameras {
            assert_eq!(c.extrinsic.rotation, e0.rotation);
            assert_eq!(c.extrinsic.translation, e0.translation);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for c in [
            SceneConfig {
                n_cameras: 0,
                ..SceneConfig::default()
            },
            SceneConfig {
                noise_px: -1.0,
                ..SceneConfig::default()
            },
            SceneConfig {
                depth_range: (0.0, 1.0),
                ..SceneConfig::default()
            },
        ] {
            assert!(matches!(
                generate_scene(&c),
                Err(SimError::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn excessive_noise_fails_generation() {
        let c = SceneConfig {
            noise_px: 1e7,
            seed: 1,
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(&c), Err(SimError::Generation(_))));
    }

    #[test]
    fn outliers_touch_requested_fraction() {
        let mut scene = generate_scene(&SceneConfig {
            n_points: 50,
            n_lines: 50,
            seed: 8,
            ..SceneConfig::default()
        })
        .unwrap();
        let before = scene.clone();
        let (po, lo) = scene.add_outliers(0.3, 1);
        assert_eq!(po.iter().chain(&lo).filter(|&&b| b).count(), 30);
        for (j, &bad) in po.iter().enumerate() {
            assert_eq!(bad, scene.points[j] != before.points[j]);
        }
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| trial_seed(7, t)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
