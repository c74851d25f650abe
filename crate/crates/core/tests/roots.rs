use mppose_core::poly::{solve_octic, solve_quartic, Poly1};
use mppose_core::sim::{generate_scene, trial_seed, SceneConfig};
use mppose_core::solver::p1l2_octic;
use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn companion(p: &Poly1) -> DMatrix<f64> {
    let n = p.degree().unwrap();
    let lead = p.coeff(n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p.coeff(i) / lead;
    }
    m
}

/// Real eigenvalues of the plain companion matrix, computed independently of
/// the library's balancing and shifting.
fn companion_real_roots(p: &Poly1) -> Vec<f64> {
    let mut roots: Vec<f64> = companion(p)
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Relative condition number `Σ|cᵢ||z|ⁱ / (|z| |p'(z)|)` of a complex root.
fn root_condition(p: &Poly1, z: Complex<f64>) -> f64 {
    let c = p.coeffs();
    let mut val = Complex::new(0.0, 0.0);
    let mut der = Complex::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        der = der * z + val;
        val = val * z + ci;
    }
    let mag = c
        .iter()
        .rev()
        .fold(0.0, |acc, ci| acc * z.norm() + ci.abs());
    mag / (z.norm().max(1e-300) * der.norm())
}

#[test]
fn ferrari_matches_companion_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (mut checked, mut skipped, mut roots_seen) = (0, 0, 0);
    while checked < 10_000 {
        let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = Poly1::new(&c);
        let eig = companion(&p).complex_eigenvalues();
        if eig
            .iter()
            .map(|&z| root_condition(&p, z))
            .any(|c| c.is_nan() || c >= 1e6)
        {
            skipped += 1;
            continue;
        }
        let got = solve_quartic(&p).unwrap();
        let oracle = companion_real_roots(&p);
        assert_eq!(got.len(), oracle.len(), "{p:?}: {got:?} vs {oracle:?}");
        for (g, o) in got.iter().zip(&oracle) {
            assert!(
                (g - o).abs() <= 1e-8 * o.abs().max(1.0),
                "{p:?}: {g} vs oracle {o}"
            );
        }
        roots_seen += got.len();
        checked += 1;
    }
    println!(
        "quartics checked {checked} ({roots_seen} real roots), ill-conditioned excluded {skipped}"
    );
}

#[test]
fn octic_roots_are_backward_stable() {
    // Far from the unit disc the absolute residual is dominated by rounding in
    // the evaluation itself, so random octics are held to the relative form.
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..2000 {
        let c: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = Poly1::new(&c);
        let roots = solve_octic(&p).unwrap();
        for &r in &roots {
            assert!(
                p.eval(r).abs() <= 1e-8 * p.eval_magnitude(r),
                "|p({r})| = {}",
                p.eval(r).abs()
            );
            if r.abs() <= 1.0 {
                assert!(p.eval(r).abs() <= 1e-7 * p.max_abs_coeff());
            }
        }
        // Every real eigenvalue of the plain companion matrix that is a
        // well-separated root must be found.
        for o in companion_real_roots(&p) {
            let (_, d) = p.eval_with_derivative(o);
            if d.abs() > 1e-3 * p.eval_magnitude(o) / (1.0 + o.abs()) {
                assert!(
                    roots
                        .iter()
                        .any(|r| (r - o).abs() <= 1e-6 * (1.0 + o.abs())),
                    "missed {o}"
                );
            }
        }
    }
}

#[test]
fn pipeline_octics_have_small_residual() {
    for t in 0..1000 {
        let scene = generate_scene(&SceneConfig::p1l2(trial_seed(31, t))).unwrap();
        let p = p1l2_octic(&scene.p1l2_problem(0, 0, 1)).unwrap();
        let tol = 1e-7 * p.max_abs_coeff();
        let roots = solve_octic(&p).unwrap();
        assert!(roots.len() <= 8);
        for r in roots {
            assert!(
                p.eval(r).abs() <= tol,
                "trial {t}: |p({r})| = {}",
                p.eval(r).abs()
            );
        }
    }
}
