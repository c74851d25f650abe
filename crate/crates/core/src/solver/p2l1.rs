//! Closed-form pose from two points and one line.
//!
//! In canonical frames the unknowns are the two point depths. Each rotation
//! angle is a rational function of them, and the two unit-circle identities
//! give two conics in `(δ2, δ3)` with at most four real intersections.

use crate::canonical::two_angle_rotation;
use crate::geometry::{CameraRig, LineCorrespondence, PointCorrespondence, Vec3};
use crate::poly::{intersect_quadrics, Poly2};

use super::{
    canonical_frames, canonical_pose, canonical_ray, check_camera, finish_solution,
    sort_by_residual, PoseSolution, SolveError, TRIG_TOL,
};

/// Divisors below this size mark a configuration without a canonical solution.
const DIVISOR_TOL: f64 = 1e-10;

/// Line seen by one camera, two points seen by (possibly other) cameras.
#[derive(Debug, Clone, Copy)]
pub struct P2L1Problem<'a> {
    pub rig: &'a CameraRig,
    pub line: LineCorrespondence,
    pub point2: PointCorrespondence,
    pub point3: PointCorrespondence,
}

/// The problem after canonicalization.
struct Canonical {
    /// Rays `c + δ d` of both points in the canonical rig frame.
    d2: Vec3,
    c2: Vec3,
    d3: Vec3,
    c3: Vec3,
    /// Height of the first point above the line, `p2 = (0, 0, p23)`.
    p23: f64,
    p3: Vec3,
}

fn validate(problem: &P2L1Problem) -> Result<(), SolveError> {
    check_camera(problem.rig, problem.line.camera, "line")?;
    check_camera(problem.rig, problem.point2.camera, "point2")?;
    check_camera(problem.rig, problem.point3.camera, "point3")
}

fn canonicalize(
    problem: &P2L1Problem,
) -> Result<(crate::canonical::CanonicalFrames, Canonical), SolveError> {
    validate(problem)?;
    let frames = canonical_frames(problem.rig, &problem.line, &problem.point2)?;
    let (d2, c2) = canonical_ray(&frames, problem.rig, &problem.point2);
    let (d3, c3) = canonical_ray(&frames, problem.rig, &problem.point3);
    let p23 = frames.world.transform_point(&problem.point2.world).z;
    let p3 = frames.world.transform_point(&problem.point3.world);
    let scale = p23.abs().max(p3.norm());
    if p23.abs() <= DIVISOR_TOL {
        return Err(SolveError::DegenerateConfiguration(
            "first point on the line",
        ));
    }
    if p3.x.abs() <= DIVISOR_TOL * scale {
        return Err(SolveError::DegenerateConfiguration(
            "second point coplanar with the line and the first point",
        ));
    }
    Ok((
        frames,
        Canonical {
            d2,
            c2,
            d3,
            c3,
            p23,
            p3,
        },
    ))
}

/// The two conics in `(δ2, δ3)` whose common zeros give the depths.
fn quadrics(k: &Canonical) -> [Poly2; 2] {
    let [d21, d22, d23] = [k.d2.x, k.d2.y, k.d2.z];
    let [d31, d32, d33] = [k.d3.x, k.d3.y, k.d3.z];
    let [c21, c22, c23] = [k.c2.x, k.c2.y, k.c2.z];
    let [c31, c32, c33] = [k.c3.x, k.c3.y, k.c3.z];
    let p23 = k.p23;
    let [p31, p32, p33] = [k.p3.x, k.p3.y, k.p3.z];

    let p23_2 = p23 * p23;
    let p31_2 = p31 * p31;
    let p33_2 = p33 * p33;

    let a1 = -d23 * d23 * (p31_2 + p33_2);
    let a2 = 2.0 * d23 * d33 * p23 * p33;
    let a3 = -2.0 * d23 * (c23 * p31_2 + c23 * p33_2 - c33 * p23 * p33);
    let a4 = -d33 * d33 * p23_2;
    let a5 = 2.0 * d33 * p23 * (c23 * p33 - c33 * p23);
    let a6 = -c23 * c23 * p31_2 - c23 * c23 * p33_2 + 2.0 * c23 * c33 * p23 * p33
        - c33 * c33 * p23_2
        + p23_2 * p31_2;

    let a7 = -d21 * d21 * p23_2 * p31_2 - d22 * d22 * p23_2 * p31_2 + d23 * d23 * p23_2 * p33_2
        - 2.0 * d23 * d23 * p23 * p31_2 * p33
        - 2.0 * d23 * d23 * p23 * p33_2 * p33
        + d23 * d23 * p31_2 * p31_2
        + 2.0 * d23 * d23 * p31_2 * p33_2
        + d23 * d23 * p33_2 * p33_2;
    let a8 = 2.0 * d21 * d31 * p23_2 * p31_2
        - 2.0 * d23 * d33 * p23_2 * p23 * p33
        - 2.0 * d23 * d33 * p23 * p33_2 * p33
        + 2.0 * d22 * d32 * p23_2 * p31_2
        + 2.0 * d23 * d33 * p23_2 * p31_2
        + 4.0 * d23 * d33 * p23_2 * p33_2
        - 2.0 * d23 * d33 * p23 * p31_2 * p33;
    let a9 = 2.0 * c23 * d23 * p31_2 * p31_2 + 2.0 * c23 * d23 * p33_2 * p33_2
        - 4.0 * c23 * d23 * p23 * p33_2 * p33
        - 2.0 * c33 * d23 * p23 * p33_2 * p33
        - 2.0 * c33 * d23 * p23_2 * p23 * p33
        - 2.0 * c21 * d21 * p23_2 * p31_2
        - 2.0 * c22 * d22 * p23_2 * p31_2
        + 2.0 * c23 * d23 * p23_2 * p33_2
        + 2.0 * c31 * d21 * p23_2 * p31_2
        + 2.0 * c32 * d22 * p23_2 * p31_2
        + 4.0 * c23 * d23 * p31_2 * p33_2
        + 2.0 * c33 * d23 * p23_2 * p31_2
        + 4.0 * c33 * d23 * p23_2 * p33_2
        - 4.0 * c23 * d23 * p23 * p31_2 * p33
        - 2.0 * c33 * d23 * p23 * p31_2 * p33;
    let a10 = -p23_2
        * (d31 * d31 * p31_2 + d32 * d32 * p31_2 - d33 * d33 * p23_2 + 2.0 * d33 * d33 * p23 * p33
            - d33 * d33 * p33_2);
    let a11 = 2.0 * c33 * d33 * p23_2 * p23_2
        - 2.0 * c23 * d33 * p23 * p33_2 * p33
        - 2.0 * c23 * d33 * p23_2 * p23 * p33
        - 4.0 * c33 * d33 * p23_2 * p23 * p33
        + 2.0 * c21 * d31 * p23_2 * p31_2
        + 2.0 * c22 * d32 * p23_2 * p31_2
        + 2.0 * c23 * d33 * p23_2 * p31_2
        + 4.0 * c23 * d33 * p23_2 * p33_2
        - 2.0 * c31 * d31 * p23_2 * p31_2
        - 2.0 * c32 * d32 * p23_2 * p31_2
        + 2.0 * c33 * d33 * p23_2 * p33_2
        - 2.0 * c23 * d33 * p23 * p31_2 * p33;
    let a12 = -c21 * c21 * p23_2 * p31_2 + 2.0 * c21 * c31 * p23_2 * p31_2
        - c22 * c22 * p23_2 * p31_2
        + 2.0 * c22 * c32 * p23_2 * p31_2
        + c23 * c23 * p23_2 * p33_2
        - 2.0 * c23 * c23 * p23 * p31_2 * p33
        - 2.0 * c23 * c23 * p23 * p33_2 * p33
        + c23 * c23 * p31_2 * p31_2
        + 2.0 * c23 * c23 * p31_2 * p33_2
        + c23 * c23 * p33_2 * p33_2
        - 2.0 * c23 * c33 * p23_2 * p23 * p33
        + 2.0 * c23 * c33 * p23_2 * p31_2
        + 4.0 * c23 * c33 * p23_2 * p33_2
        - 2.0 * c23 * c33 * p23 * p31_2 * p33
        - 2.0 * c23 * c33 * p23 * p33_2 * p33
        - c31 * c31 * p23_2 * p31_2
        - c32 * c32 * p23_2 * p31_2
        + c33 * c33 * p23_2 * p23_2
        - 2.0 * c33 * c33 * p23_2 * p23 * p33
        + c33 * c33 * p23_2 * p33_2
        + p23_2 * p31_2 * p32 * p32;

    let conic = |c: [f64; 6]| {
        Poly2::from_terms(&[
            (2, 0, c[0]),
            (1, 1, c[1]),
            (1, 0, c[2]),
            (0, 2, c[3]),
            (0, 1, c[4]),
            (0, 0, c[5]),
        ])
    };
    [
        conic([a1, a2, a3, a4, a5, a6]),
        conic([a7, a8, a9, a10, a11, a12]),
    ]
}

/// The two depth conics of a problem, in `(δ2, δ3)`.
pub fn p2l1_quadrics(problem: &P2L1Problem) -> Result<[Poly2; 2], SolveError> {
    let (_, k) = canonicalize(problem)?;
    Ok(quadrics(&k))
}

/// All poses consistent with the three observations, best residual first.
pub fn solve_p2l1(problem: &P2L1Problem) -> Result<Vec<PoseSolution>, SolveError> {
    let (frames, k) = canonicalize(problem)?;
    let [q16, q18] = quadrics(&k);
    let depth_pairs = intersect_quadrics(&q16, &q18)?;

    let p2 = Vec3::new(0.0, 0.0, k.p23);
    let q = k.p3 - p2;
    let mut out = Vec::with_capacity(depth_pairs.len());
    for (delta2, delta3) in depth_pairs {
        let v = k.c2 + k.d2 * delta2;
        let w = k.c3 + k.d3 * delta3;
        let u = w - v;
        let c_theta = v.z / k.p23;
        let s_theta = (c_theta * q.z - u.z) / q.x;
        let a = c_theta * q.x + s_theta * q.z;
        let den = u.x * u.x + u.y * u.y;
        if !(den > 0.0) {
            continue;
        }
        let c_alpha = (a * u.x + q.y * u.y) / den;
        let s_alpha = (a * u.y - q.y * u.x) / den;
        let theta_norm = c_theta.hypot(s_theta);
        let alpha_norm = c_alpha.hypot(s_alpha);
        if !((theta_norm * theta_norm - 1.0).abs() <= TRIG_TOL)
            || !((alpha_norm * alpha_norm - 1.0).abs() <= TRIG_TOL)
        {
            continue;
        }
        let rotation = two_angle_rotation(
            c_theta / theta_norm,
            s_theta / theta_norm,
            c_alpha / alpha_norm,
            s_alpha / alpha_norm,
        );
        let translation = p2 - rotation * v;
        let pose = frames.pose_from_canonical(&canonical_pose(rotation, translation));
        out.push(finish_solution(
            pose,
            problem.rig,
            &[(&problem.point2, delta2), (&problem.point3, delta3)],
            &[&problem.line],
        ));
    }
    sort_by_residual(&mut out);
    Ok(out)
}
