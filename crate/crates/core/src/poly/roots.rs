//! Real-root extraction: closed forms up to degree four, companion-matrix
//! eigenvalues for degree eight.

use nalgebra::{Complex, DMatrix, Schur};

use super::{Poly1, PolyError};

/// Relative size below which a leading coefficient is treated as zero.
pub const TRIM_TOL: f64 = 1e-13;

/// Octic coefficients legitimately span many orders of magnitude, so only
/// rounding-level leading terms are dropped.
pub const OCTIC_TRIM_TOL: f64 = 1e-24;
/// Imaginary parts below this fraction of the eigenvalue's modulus count as real.
pub const OCTIC_IMAG_TOL: f64 = 1e-7;

/// Polished roots must evaluate below this fraction of `Σ|cᵢ||r|ⁱ`.
const OCTIC_RESIDUAL_TOL: f64 = 1e-8;
const QUARTIC_POLISH_STEPS: usize = 3;
const OCTIC_POLISH_STEPS: usize = 6;

/// Real roots of `c0 + c1 x + c2 x²`, ascending. A slightly negative
/// discriminant (rounding on a double root) yields the double root.
pub fn solve_quadratic(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2 == 0.0 {
        return if c1 != 0.0 { vec![-c0 / c1] } else { vec![] };
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let disc_scale = c1 * c1 + (4.0 * c2 * c0).abs();
    if disc <= 0.0 {
        if disc >= -1e-14 * disc_scale {
            return vec![-c1 / (2.0 * c2)];
        }
        return vec![];
    }
    let sq = disc.sqrt();
    // Numerically stable pairing avoids cancellation in −b ± √Δ.
    let q = -0.5 * (c1 + c1.signum() * sq);
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

/// Real roots of `c0 + c1 x + c2 x² + c3 x³` (`c3 ≠ 0`), ascending.
/// Trigonometric form for three real roots, Cardano otherwise.
pub fn solve_cubic(c0: f64, c1: f64, c2: f64, c3: f64) -> Vec<f64> {
    if c3 == 0.0 {
        return solve_quadratic(c0, c1, c2);
    }
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = if p == 0.0 && q == 0.0 {
        vec![-shift]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = -(half_q.signum()) * (half_q.abs() + sq).cbrt();
        let v = if u != 0.0 { -third_p / u } else { 0.0 };
        vec![u + v - shift]
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };
    let poly = Poly1::new(&[c0, c1, c2, c3]);
    for r in &mut roots {
        *r = newton_polish(&poly, *r, 2);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Newton iterations that only accept steps reducing `|p(x)|`.
pub fn newton_polish(p: &Poly1, mut x: f64, steps: usize) -> f64 {
    let (mut fx, mut dfx) = p.eval_with_derivative(x);
    for _ in 0..steps {
        if fx == 0.0 || dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let cand = x - fx / dfx;
        let (fc, dfc) = p.eval_with_derivative(cand);
        if !(fc.abs() < fx.abs()) {
            break;
        }
        x = cand;
        fx = fc;
        dfx = dfc;
    }
    x
}

fn prepare(p: &Poly1, trim: f64) -> Result<Poly1, PolyError> {
    if p.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(PolyError::InvalidPolynomial("non-finite coefficient"));
    }
    let t = p.trimmed(trim);
    if t.is_zero() {
        return Err(PolyError::InvalidPolynomial("zero polynomial"));
    }
    Ok(t.normalized())
}

/// All real roots of a polynomial of degree ≤ 4 via Ferrari's method, each
/// polished by Newton steps. Roots are ascending; a double root may appear
/// twice.
pub fn solve_quartic(p: &Poly1) -> Result<Vec<f64>, PolyError> {
    let p = prepare(p, TRIM_TOL)?;
    let c = |k| p.coeff(k);
    let roots = match p.degree() {
        Some(0) => return Ok(vec![]),
        Some(1) => vec![-c(0) / c(1)],
        Some(2) => solve_quadratic(c(0), c(1), c(2)),
        Some(3) => solve_cubic(c(0), c(1), c(2), c(3)),
        Some(4) => ferrari(c(4), c(3), c(2), c(1), c(0)),
        _ => return Err(PolyError::ShapeError("quartic solver needs degree ≤ 4")),
    };
    let mut roots: Vec<f64> = roots
        .into_iter()
        .map(|r| newton_polish(&p, r, QUARTIC_POLISH_STEPS))
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// `a x⁴ + b x³ + c x² + d x + e`.
fn ferrari(a: f64, b: f64, c: f64, d: f64, e: f64) -> Vec<f64> {
    let (b, c, d, e) = (b / a, c / a, d / a, e / a);
    // Depressed quartic y⁴ + p y² + q y + r with x = y − b/4.
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let scale = 1.0 + p.abs() + q.abs().sqrt() + r.abs().sqrt();
    let mut ys = Vec::with_capacity(4);
    if q.abs() <= 1e-14 * scale * scale * scale {
        // Biquadratic: z = y².
        for z in solve_quadratic(r, p, 1.0) {
            if z > 0.0 {
                let s = z.sqrt();
                ys.push(-s);
                ys.push(s);
            } else if z >= -1e-14 * scale * scale {
                ys.push(0.0);
            }
        }
    } else {
        // Resolvent cubic in m: m³ + p m² + (p²/4 − r) m − q²/8 = 0; its
        // largest root is positive because the cubic is −q²/8 < 0 at m = 0.
        let resolvent = solve_cubic(-q * q / 8.0, p * p / 4.0 - r, p, 1.0);
        let m = resolvent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(m > 0.0) {
            return vec![];
        }
        let s = (2.0 * m).sqrt();
        let k = q / (2.0 * s);
        ys.extend(solve_quadratic(p / 2.0 + m + k, -s, 1.0));
        ys.extend(solve_quadratic(p / 2.0 + m - k, s, 1.0));
    }
    ys.into_iter().map(|y| y - shift).collect()
}

/// All real roots of a polynomial of degree ≤ 8 as eigenvalues of the balanced
/// companion matrix, Newton-polished, ascending and deduplicated.
pub fn solve_octic(p: &Poly1) -> Result<Vec<f64>, PolyError> {
    let input = prepare(p, 0.0)?;
    let p = prepare(p, OCTIC_TRIM_TOL)?;
    let n = match p.degree() {
        Some(0) => return Ok(vec![]),
        Some(d) if d <= 8 => d,
        _ => return Err(PolyError::ShapeError("octic solver needs degree ≤ 8")),
    };
    let lead = p.coeff(n);
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -p.coeff(i) / lead;
    }
    balance(&mut comp);
    let eig = companion_eigenvalues(&comp).ok_or(PolyError::DegenerateSystem(
        "eigenvalue iteration did not converge",
    ))?;
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= OCTIC_IMAG_TOL * z.norm())
        .map(|z| newton_polish(&p, z.re, OCTIC_POLISH_STEPS))
        // Checked against the untrimmed input so trimming cannot invent roots.
        .filter(|&r| {
            r.is_finite() && input.eval(r).abs() <= OCTIC_RESIDUAL_TOL * input.eval_magnitude(r)
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())));
    Ok(roots)
}

/// Eigenvalues via the real Schur form. Spectra with many eigenvalues of equal
/// modulus can stall the unshifted iteration, so a few diagonal shifts are
/// tried before giving up.
fn companion_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    for shift in [0.0, 0.1372, -0.2911, 0.5183] {
        let shifted = m + DMatrix::<f64>::identity(n, n) * (shift * scale);
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 200 * n) {
            let eig = schur.complex_eigenvalues();
            if eig.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Some(
                    eig.iter()
                        .map(|z| Complex::new(z.re - shift * scale, z.im))
                        .collect(),
                );
            }
        }
    }
    None
}

/// Parlett–Reinsch balancing with power-of-two scalings.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r / f) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_roots(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "got {got:?}, want {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
        }
    }

    #[test]
    fn quadratic_cases() {
        assert_roots(&solve_quadratic(-1.0, 0.0, 1.0), &[-1.0, 1.0], 0.0);
        assert_roots(&solve_quadratic(1.0, 0.0, 1.0), &[], 0.0);
        assert_roots(&solve_quadratic(1.0, -2.0, 1.0), &[1.0], 0.0);
        // Large-ratio coefficients keep the small root accurate.
        let r = solve_quadratic(1.0, -1e8, 1.0);
        assert!((r[0] - 1e-8).abs() < 1e-20);
    }

    #[test]
    fn cubic_cases() {
        let p = Poly1::from_roots(&[-2.0, 0.5, 3.0]);
        let c = p.coeffs();
        assert_roots(
            &solve_cubic(c[0], c[1], c[2], c[3]),
            &[-2.0, 0.5, 3.0],
            1e-12,
        );
        // x³ + x + 1: single real root.
        let r = solve_cubic(1.0, 1.0, 0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0].powi(3) + r[0] + 1.0).abs() < 1e-14);
        assert_roots(&solve_cubic(-8.0, 0.0, 0.0, 1.0), &[2.0], 1e-14);
    }

    #[test]
    fn quartic_cases() {
        assert_roots(
            &solve_quartic(&Poly1::new(&[-1.0, 0.0, 0.0, 0.0, 1.0])).unwrap(),
            &[-1.0, 1.0],
            1e-14,
        );
        let p = Poly1::from_roots(&[1.0, 2.0, 3.0, 4.0]);
        assert_roots(&solve_quartic(&p).unwrap(), &[1.0, 2.0, 3.0, 4.0], 1e-10);
        // Falls through to lower degrees.
        assert_roots(
            &solve_quartic(&Poly1::new(&[-6.0, 1.0, 1.0, 0.0, 0.0])).unwrap(),
            &[-3.0, 2.0],
            1e-14,
        );
        assert_roots(
            &solve_quartic(&Poly1::new(&[2.0, 4.0])).unwrap(),
            &[-0.5],
            0.0,
        );
        // (x² + 1)(x² + 4): no real roots.
        assert!(solve_quartic(&Poly1::new(&[4.0, 0.0, 5.0, 0.0, 1.0]))
            .unwrap()
            .is_empty());
        assert_eq!(
            solve_quartic(&Poly1::zero()),
            Err(PolyError::InvalidPolynomial("zero polynomial"))
        );
        assert!(solve_quartic(&Poly1::from_roots(&[1.0; 5])).is_err());
    }

    #[test]
    fn quartic_with_complex_pair() {
        // (x − 1)(x + 2)(x² + 2x + 5)
        let p = Poly1::from_roots(&[1.0, -2.0]) * Poly1::new(&[5.0, 2.0, 1.0]);
        assert_roots(&solve_quartic(&p).unwrap(), &[-2.0, 1.0], 1e-12);
    }

    #[test]
    fn octic_cases() {
        let mut c = [0.0; 9];
        c[0] = -256.0;
        c[8] = 1.0;
        assert_roots(&solve_octic(&Poly1::new(&c)).unwrap(), &[-2.0, 2.0], 1e-12);
        let roots: Vec<f64> = (1..=8).map(f64::from).collect();
        let p = Poly1::from_roots(&roots);
        assert_roots(&solve_octic(&p).unwrap(), &roots, 1e-8);
        assert!(solve_octic(&Poly1::zero()).is_err());
        assert!(solve_octic(&Poly1::constant(3.0)).unwrap().is_empty());
    }
}
