use super::{solve_quartic, Poly1, Poly2, PolyError};

/// Relative size below which a whole coefficient family counts as zero.
const ZERO_TOL: f64 = 1e-12;
/// Negative discriminants down to this fraction of their magnitude are
/// rounding noise and get clamped to zero.
const DISCRIMINANT_TOL: f64 = 1e-12;
/// A second δ3 branch is only kept if it satisfies both curves this tightly.
const SECOND_BRANCH_TOL: f64 = 1e-9;
const POLISH_STEPS: usize = 8;
/// Intersections closer than this (relative) are one point.
const MERGE_TOL: f64 = 1e-6;

/// Real intersections of two conics in `(x, y)`.
///
/// `q1` is solved for `y` in radical form and substituted into `q2`; multiplying
/// the two conjugate branches clears the radical and leaves a quartic in `x`.
/// For each real `x`, the `y` branch with the smaller `|q2|` is kept, and both
/// are kept where the curves genuinely meet twice at the same `x`.
pub fn intersect_quadrics(q1: &Poly2, q2: &Poly2) -> Result<Vec<(f64, f64)>, PolyError> {
    let s1 = q1.max_abs_coeff();
    let s2 = q2.max_abs_coeff();
    if !(s1 > 0.0 && s2 > 0.0) || !s1.is_finite() || !s2.is_finite() {
        return Err(PolyError::DegenerateSystem("vanishing conic"));
    }
    if q1.degree_y().unwrap_or(0) > 2 || q2.degree_y().unwrap_or(0) > 2 {
        return Err(PolyError::ShapeError(
            "conic of degree > 2 in the second variable",
        ));
    }
    let (a1, b1, c1) = (q1.collect_y(2), q1.collect_y(1), q1.collect_y(0));
    let (a2, b2, c2) = (q2.collect_y(2), q2.collect_y(1), q2.collect_y(0));

    let linear = a1.max_abs_coeff() <= ZERO_TOL * s1;
    let (resultant, disc) = if linear {
        if b1.max_abs_coeff() <= ZERO_TOL * s1 {
            return Err(PolyError::DegenerateSystem(
                "first conic is free of the second variable",
            ));
        }
        // y = −c1/b1 substituted into q2 and scaled by b1².
        let r = a2 * c1 * c1 - b2 * b1 * c1 + c2 * b1 * b1;
        (r, None)
    } else {
        // y = (p ± √disc)/k
        let p = -b1;
        let disc = b1 * b1 - a1 * c1 * 4.0;
        let k = a1 * 2.0;
        let even = a2 * (p * p + disc) + b2 * k * p + c2 * k * k;
        let odd = a2 * p * 2.0 + b2 * k;
        (even * even - odd * odd * disc, Some(disc))
    };
    let res_scale = resultant.max_abs_coeff();
    if !(res_scale > 0.0) || resultant.trimmed(ZERO_TOL).degree().unwrap_or(0) == 0 {
        return Err(PolyError::DegenerateSystem(
            "eliminant vanishes identically",
        ));
    }

    let mut xs = solve_quartic(&resultant)?;
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())));

    let residual = |x: f64, y: f64| -> f64 { (q1.eval(x, y) / s1).hypot(q2.eval(x, y) / s2) };
    let mut found: Vec<((f64, f64), f64)> = Vec::new();
    for x in xs {
        let ys: Vec<f64> = match disc {
            None => vec![-c1.eval(x) / b1.eval(x)],
            Some(disc) => {
                let d = disc.eval(x);
                let d_mag = b1.eval_magnitude(x).powi(2)
                    + 4.0 * a1.eval_magnitude(x) * c1.eval_magnitude(x);
                if d < -DISCRIMINANT_TOL * d_mag {
                    continue;
                }
                let sq = d.max(0.0).sqrt();
                let (p, k) = (-b1.eval(x), 2.0 * a1.eval(x));
                vec![(p + sq) / k, (p - sq) / k]
            }
        };
        let mut cands: Vec<(f64, f64)> = ys
            .into_iter()
            .filter(|y| y.is_finite())
            .map(|y| polish(q1, q2, s1, s2, x, y))
            .collect();
        cands.sort_by(|a, b| (q2.eval(a.0, a.1).abs()).total_cmp(&q2.eval(b.0, b.1).abs()));
        for (i, c) in cands.into_iter().enumerate() {
            let r = residual(c.0, c.1);
            if i == 0 || r <= SECOND_BRANCH_TOL {
                found.push((c, r));
            }
        }
    }
    // Near-tangent intersections show up as clusters of nearly equal points;
    // keep the best of each cluster and never more than the Bézout bound.
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (c, _) in found {
        let fresh = out.iter().all(|o| {
            (o.0 - c.0).abs() + (o.1 - c.1).abs() > MERGE_TOL * (1.0 + c.0.abs() + c.1.abs())
        });
        if fresh && out.len() < 4 {
            out.push(c);
        }
    }
    Ok(out)
}

/// Newton refinement on the 2×2 system; steps that do not reduce the
/// normalized residual are rejected.
fn polish(q1: &Poly2, q2: &Poly2, s1: f64, s2: f64, mut x: f64, mut y: f64) -> (f64, f64) {
    let res = |x: f64, y: f64| (q1.eval(x, y) / s1, q2.eval(x, y) / s2);
    let (mut f1, mut f2) = res(x, y);
    for _ in 0..POLISH_STEPS {
        let norm = f1.hypot(f2);
        if norm == 0.0 {
            break;
        }
        let (g1x, g1y) = q1.gradient(x, y);
        let (g2x, g2y) = q2.gradient(x, y);
        let (j11, j12, j21, j22) = (g1x / s1, g1y / s1, g2x / s2, g2y / s2);
        let det = j11 * j22 - j12 * j21;
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let dx = (j22 * f1 - j12 * f2) / det;
        let dy = (j11 * f2 - j21 * f1) / det;
        let (nx, ny) = (x - dx, y - dy);
        let (n1, n2) = res(nx, ny);
        if !(n1.hypot(n2) < norm) {
            break;
        }
        x = nx;
        y = ny;
        f1 = n1;
        f2 = n2;
    }
    (x, y)
}

/// Removes `s` from `f(s, y) = 0` given `s² = g(y)`.
///
/// Writing `f = E(y) + s·O(y)` after substituting even powers of `s`, the
/// relation `E = −s·O` squares to `E² − g·O² = 0`. When `f` has no odd powers
/// of `s` the substitution alone already removes it and `E` is returned.
pub fn eliminate_to_octic(f: &Poly2, s_squared: &Poly1) -> Result<Poly1, PolyError> {
    if f.is_zero() {
        return Err(PolyError::DegenerateSystem("zero constraint"));
    }
    let deg_s = f.degree_x().unwrap_or(0);
    if deg_s > 4 {
        return Err(PolyError::ShapeError(
            "constraint has degree > 4 in the eliminated variable",
        ));
    }
    let mut even = Poly1::zero();
    let mut odd = Poly1::zero();
    let mut g_pow = Poly1::constant(1.0);
    for k in 0..=deg_s {
        if k >= 2 && k % 2 == 0 {
            g_pow = g_pow * *s_squared;
        }
        let term = f.collect_x(k) * g_pow;
        if k % 2 == 0 {
            even = even + term;
        } else {
            odd = odd + term;
        }
    }
    let scale = f.max_abs_coeff();
    let odd_vanishes = odd.max_abs_coeff() <= ZERO_TOL * scale;
    let (out, ref_scale) = if odd_vanishes {
        (even, scale * (1.0 + s_squared.max_abs_coeff()).powi(2))
    } else {
        let e2 = even * even;
        let o2 = *s_squared * odd * odd;
        let r = e2.max_abs_coeff().max(o2.max_abs_coeff());
        (e2 - o2, r)
    };
    if out.max_abs_coeff() <= ZERO_TOL * ref_scale {
        return Err(PolyError::DegenerateSystem(
            "eliminant vanishes identically",
        ));
    }
    Ok(out)
}
