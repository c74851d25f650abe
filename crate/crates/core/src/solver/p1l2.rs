//! Pose from one point and two lines.
//!
//! In canonical frames `cθ` is linear in the point depth `δ2`. The second line
//! must lie in its interpretation plane, which gives equations linear in
//! `(cα, sα)` with coefficients polynomial in `(sθ, δ2)`. Solving two of them
//! and imposing `cα² + sα² = 1` leaves one constraint in `(sθ, δ2)`, and
//! `sθ² = 1 − cθ²` reduces it to a degree-8 polynomial in `δ2`.

use nalgebra::{Matrix5x3, Vector5};

use crate::canonical::{two_angle_rotation, CanonicalFrames};
use crate::geometry::{CameraRig, LineCorrespondence, PointCorrespondence, Vec3};
use crate::poly::{eliminate_to_octic, solve_octic, Poly1, Poly2};

use super::{
    canonical_frames, canonical_pose, canonical_ray, check_camera, finish_solution,
    sort_by_residual, PoseSolution, SolveError,
};

const DIVISOR_TOL: f64 = 1e-10;
/// Roots with `sθ²` more negative than this are complex.
const NEGATIVE_SQUARE_TOL: f64 = 1e-10;
/// The unsquared constraint must hold to this fraction of its magnitude.
const SIGN_TOL: f64 = 1e-6;
/// Poses closer than this are the same solution.
const DUPLICATE_TOL: f64 = 1e-9;
const REFINE_STEPS: usize = 6;
/// The other sign of `sθ` is also kept only when it fits this tightly.
const SECOND_SIGN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct P1L2Problem<'a> {
    pub rig: &'a CameraRig,
    pub line1: LineCorrespondence,
    pub point2: PointCorrespondence,
    pub line3: LineCorrespondence,
}

/// Counters for candidates dropped during back-substitution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct P1L2Stats {
    pub octic_roots: usize,
    pub complex_angle: usize,
    pub sign_rejected: usize,
    pub degenerate_denominator: usize,
}

/// The four coplanarity equations as `A cα + B sα + C`, entries in `(sθ, δ2)`.
struct LinearSystem {
    a: [Poly2; 4],
    b: [Poly2; 4],
    c: [Poly2; 4],
}

/// Linear-in-(cα, sα) system for the second line; `cos_theta` is `cθ(δ2)`.
#[allow(clippy::too_many_arguments)]
fn coplanarity_system(
    line_dir: &Vec3,
    line_moment: &Vec3,
    normal: &Vec3,
    offset: f64,
    p23: f64,
    d2: &Vec3,
    c2: &Vec3,
    cos_theta: &Poly1,
) -> LinearSystem {
    let ct = Poly2::from_y(cos_theta);
    let st = Poly2::x();
    let k = |v: f64| Poly2::constant(v);
    let [n1, n2, n3] = [normal.x, normal.y, normal.z];
    // R n = cα (Mc n) + sα (Ms n) + M0 n for the two-angle rotation.
    let mc_n = [ct * n1, k(n2), st * n1];
    let ms_n = [ct * n2, k(-n1), st * n2];
    let m0_n = [st * (-n3), Poly2::zero(), ct * n3];

    // Rows 1–3: m × (Rn) − ((Rn)·p2) l. Row 4: l·(Rn).
    let l = [line_dir.x, line_dir.y, line_dir.z];
    let m = [line_moment.x, line_moment.y, line_moment.z];
    let rows = |r: &[Poly2; 3]| -> [Poly2; 4] {
        let along = r[2] * p23;
        [
            r[2] * m[1] - r[1] * m[2] - along * l[0],
            r[0] * m[2] - r[2] * m[0] - along * l[1],
            r[1] * m[0] - r[0] * m[1] - along * l[2],
            r[0] * l[0] + r[1] * l[1] + r[2] * l[2],
        ]
    };
    let a = rows(&mc_n);
    let b = rows(&ms_n);
    let mut c = rows(&m0_n);
    // Plane offset after the pose: d_C + n·v, with v = c2 + δ2 d2.
    let shift = Poly2::from_y(&Poly1::linear(offset + normal.dot(c2), normal.dot(d2)));
    for (ci, li) in c.iter_mut().zip(l).take(3) {
        *ci = *ci + shift * li;
    }
    LinearSystem { a, b, c }
}

/// Picks the best-conditioned pair of equations by probing the determinant.
fn best_pair(sys: &LinearSystem, depth_scale: f64) -> (usize, usize) {
    let probes_s = [-0.7, -0.2, 0.35, 0.9];
    let probes_d = [0.3, 1.0, 2.5].map(|f| f * depth_scale);
    let mut best = (0, 1);
    let mut best_val = -1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let det = sys.a[i] * sys.b[j] - sys.a[j] * sys.b[i];
            let val: f64 = probes_s
                .iter()
                .flat_map(|&s| probes_d.iter().map(move |&d| (s, d)))
                .map(|(s, d)| det.eval(s, d).abs())
                .sum();
            if val > best_val {
                best_val = val;
                best = (i, j);
            }
        }
    }
    best
}

/// The canonical constraints in `(δ2, θ, α)`: the first line's plane passes
/// through the origin, and the second line lies in its plane.
struct CanonicalEquations {
    d2: Vec3,
    c2: Vec3,
    p23: f64,
    dir: Vec3,
    moment: Vec3,
    normal: Vec3,
    offset: f64,
}

impl CanonicalEquations {
    fn residual(&self, x: &[f64; 3]) -> Vector5<f64> {
        let [delta2, theta, alpha] = *x;
        let r = two_angle_rotation(theta.cos(), theta.sin(), alpha.cos(), alpha.sin());
        let v = self.c2 + self.d2 * delta2;
        let rn = r * self.normal;
        let plane_offset = self.offset - rn.z * self.p23 + self.normal.dot(&v);
        let f = self.moment.cross(&rn) + self.dir * plane_offset;
        Vector5::new(
            theta.cos() * self.p23 - v.z,
            f.x,
            f.y,
            f.z,
            self.dir.dot(&rn),
        )
    }

    fn scale(&self, x: &[f64; 3]) -> f64 {
        let v = self.c2 + self.d2 * x[0];
        1.0 + self.p23.abs() + v.norm() + self.moment.norm() + self.offset.abs()
    }

    fn relative_residual(&self, x: &[f64; 3]) -> f64 {
        self.residual(x).norm() / self.scale(x)
    }

    /// Gauss–Newton on the five equations; steps that do not lower the
    /// residual are rejected.
    fn refine(&self, mut x: [f64; 3]) -> [f64; 3] {
        let mut r = self.residual(&x);
        for _ in 0..REFINE_STEPS {
            let norm = r.norm();
            if norm == 0.0 {
                break;
            }
            let mut jac = Matrix5x3::<f64>::zeros();
            for k in 0..3 {
                let h = 1e-7 * (1.0 + x[k].abs());
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                jac.set_column(k, &((self.residual(&xp) - self.residual(&xm)) / (2.0 * h)));
            }
            let Ok(step) = jac.svd(true, true).solve(&r, 1e-14) else {
                break;
            };
            let cand = [x[0] - step[0], x[1] - step[1], x[2] - step[2]];
            let rc = self.residual(&cand);
            if !(rc.norm() < norm) {
                break;
            }
            x = cand;
            r = rc;
        }
        x
    }
}

pub fn solve_p1l2(problem: &P1L2Problem) -> Result<Vec<PoseSolution>, SolveError> {
    solve_p1l2_with_stats(problem).map(|(s, _)| s)
}

/// Everything the back-substitution needs once the octic in `δ2` is formed.
struct Reduced {
    frames: CanonicalFrames,
    d2: Vec3,
    c2: Vec3,
    p23: f64,
    line3: crate::geometry::PluckerLine,
    plane3: crate::geometry::Plane,
    cos_theta: Poly1,
    sin_sq: Poly1,
    num_c: Poly2,
    num_s: Poly2,
    det: Poly2,
    constraint: Poly2,
    octic: Poly1,
}

fn reduce(problem: &P1L2Problem) -> Result<Reduced, SolveError> {
    check_camera(problem.rig, problem.line1.camera, "line1")?;
    check_camera(problem.rig, problem.point2.camera, "point2")?;
    check_camera(problem.rig, problem.line3.camera, "line3")?;
    let frames: CanonicalFrames = canonical_frames(problem.rig, &problem.line1, &problem.point2)?;
    let (d2, c2) = canonical_ray(&frames, problem.rig, &problem.point2);
    let p23 = frames.world.transform_point(&problem.point2.world).z;
    if p23.abs() <= DIVISOR_TOL {
        return Err(SolveError::DegenerateConfiguration(
            "first point on the line",
        ));
    }
    let line3 = frames.world.transform_line(&problem.line3.world);
    let cam3 = &problem.rig.cameras[problem.line3.camera];
    let plane3 = frames
        .rig
        .transform_plane(&cam3.extrinsic.transform_plane(&problem.line3.plane));

    let cos_theta = Poly1::linear(c2.z / p23, d2.z / p23);
    let sin_sq = Poly1::constant(1.0) - cos_theta * cos_theta;
    let sys = coplanarity_system(
        &line3.direction,
        &line3.moment,
        &plane3.normal,
        plane3.offset,
        p23,
        &d2,
        &c2,
        &cos_theta,
    );
    if (0..4).all(|i| sys.a[i].is_zero() && sys.b[i].is_zero() && sys.c[i].is_zero()) {
        return Err(SolveError::DegenerateSystem(
            "second line imposes no constraint",
        ));
    }
    let (i, j) = best_pair(&sys, p23.abs().max(c2.norm()).max(1e-3));
    let (ai, bi, ci) = (sys.a[i], sys.b[i], sys.c[i]);
    let (aj, bj, cj) = (sys.a[j], sys.b[j], sys.c[j]);
    let num_c = bi * cj - bj * ci;
    let num_s = aj * ci - ai * cj;
    let det = ai * bj - aj * bi;
    let constraint = num_c * num_c + num_s * num_s - det * det;
    if constraint.max_abs_coeff() <= 1e-14 * (det * det).max_abs_coeff() {
        return Err(SolveError::DegenerateSystem(
            "angle constraint vanishes identically",
        ));
    }
    let octic = eliminate_to_octic(&constraint, &sin_sq)?;
    Ok(Reduced {
        frames,
        d2,
        c2,
        p23,
        line3,
        plane3,
        cos_theta,
        sin_sq,
        num_c,
        num_s,
        det,
        constraint,
        octic,
    })
}

/// Univariate polynomial in the first point's depth whose real roots seed
/// the solutions.
pub fn p1l2_octic(problem: &P1L2Problem) -> Result<Poly1, SolveError> {
    reduce(problem).map(|r| r.octic)
}

/// [`solve_p1l2`] together with counts of discarded candidates.
pub fn solve_p1l2_with_stats(
    problem: &P1L2Problem,
) -> Result<(Vec<PoseSolution>, P1L2Stats), SolveError> {
    let Reduced {
        frames,
        d2,
        c2,
        p23,
        line3,
        plane3,
        cos_theta,
        sin_sq,
        num_c,
        num_s,
        det,
        constraint,
        octic,
    } = reduce(problem)?;
    let roots = solve_octic(&octic)?;

    let mut stats = P1L2Stats {
        octic_roots: roots.len(),
        ..Default::default()
    };
    let p2 = Vec3::new(0.0, 0.0, p23);
    let eqs = CanonicalEquations {
        d2,
        c2,
        p23,
        dir: line3.direction,
        moment: line3.moment,
        normal: plane3.normal,
        offset: plane3.offset,
    };
    let rel = |st: f64, d: f64| {
        constraint.eval(st, d).abs() / constraint.eval_magnitude(st, d).max(f64::MIN_POSITIVE)
    };
    let mut found: Vec<([f64; 3], f64)> = Vec::new();
    for delta2 in roots {
        let s_sq = sin_sq.eval(delta2);
        if s_sq < -NEGATIVE_SQUARE_TOL {
            stats.complex_angle += 1;
            continue;
        }
        let s = s_sq.max(0.0).sqrt();
        let signs: &[f64] = if s > 0.0 { &[1.0, -1.0] } else { &[1.0] };
        let mut cands = Vec::with_capacity(2);
        for sign in signs {
            let s_theta = sign * s;
            let dv = det.eval(s_theta, delta2);
            if dv.abs() <= DIVISOR_TOL * det.eval_magnitude(s_theta, delta2) || dv == 0.0 {
                continue;
            }
            let c_alpha = num_c.eval(s_theta, delta2) / dv;
            let s_alpha = num_s.eval(s_theta, delta2) / dv;
            let start = [
                delta2,
                s_theta.atan2(cos_theta.eval(delta2)),
                s_alpha.atan2(c_alpha),
            ];
            let x = eqs.refine(start);
            cands.push((x, eqs.relative_residual(&x)));
        }
        if cands.is_empty() {
            stats.degenerate_denominator += 1;
            continue;
        }
        cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut accepted = 0;
        for (i, (x, res)) in cands.into_iter().enumerate() {
            // The unsquared constraint rejects roots introduced by squaring.
            let fits = res <= SIGN_TOL && rel(x[1].sin(), x[0]) <= SIGN_TOL;
            if fits && (i == 0 || res <= SECOND_SIGN_TOL) {
                found.push((x, res));
                accepted += 1;
            }
        }
        if accepted == 0 {
            stats.sign_rejected += 1;
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut out: Vec<PoseSolution> = Vec::new();
    for ([delta2, theta, alpha], _) in found {
        let rotation = two_angle_rotation(theta.cos(), theta.sin(), alpha.cos(), alpha.sin());
        let v = c2 + d2 * delta2;
        let translation = p2 - rotation * v;
        let pose = frames.pose_from_canonical(&canonical_pose(rotation, translation));
        let duplicate = out.iter().any(|o| {
            (o.pose.rotation - pose.rotation).amax() <= DUPLICATE_TOL
                && (o.pose.translation - pose.translation).amax()
                    <= DUPLICATE_TOL * (1.0 + pose.translation.amax())
        });
        if !duplicate && out.len() < 8 {
            out.push(finish_solution(
                pose,
                problem.rig,
                &[(&problem.point2, delta2)],
                &[&problem.line1, &problem.line3],
            ));
        }
    }
    sort_by_residual(&mut out);
    Ok((out, stats))
}
