use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::Poly1;

/// Highest degree per variable a [`Poly2`] can hold.
pub const MAX_DEGREE_2: usize = 8;
const N: usize = MAX_DEGREE_2 + 1;

/// Dense bivariate polynomial `Σ c[i][j] xⁱ yʲ`.
#[derive(Clone, Copy, PartialEq)]
pub struct Poly2 {
    coeffs: [[f64; N]; N],
    /// Exclusive upper bounds on the populated x and y powers.
    nx: usize,
    ny: usize,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self {
            coeffs: [[0.0; N]; N],
            nx: 0,
            ny: 0,
        }
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.set(0, 0, c);
        p
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        let mut p = Self::zero();
        p.set(1, 0, 1.0);
        p
    }

    /// The polynomial `y`.
    pub fn y() -> Self {
        let mut p = Self::zero();
        p.set(0, 1, 1.0);
        p
    }

    /// Embeds a univariate polynomial in `x`.
    pub fn from_x(p: &Poly1) -> Self {
        let mut out = Self::zero();
        for (i, &c) in p.coeffs().iter().enumerate() {
            out.set(i, 0, c);
        }
        out
    }

    /// Embeds a univariate polynomial in `y`.
    pub fn from_y(p: &Poly1) -> Self {
        let mut out = Self::zero();
        for (j, &c) in p.coeffs().iter().enumerate() {
            out.set(0, j, c);
        }
        out
    }

    /// Builds from `(x power, y power, coefficient)` terms; repeated terms add.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let mut p = Self::zero();
        for &(i, j, c) in terms {
            let v = p.coeff(i, j) + c;
            p.set(i, j, v);
        }
        p
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i < N && j < N {
            self.coeffs[i][j]
        } else {
            0.0
        }
    }

    /// # Panics
    /// If either power exceeds `MAX_DEGREE_2`.
    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        assert!(
            i < N && j < N,
            "bivariate degree ({i}, {j}) exceeds {MAX_DEGREE_2}"
        );
        self.coeffs[i][j] = c;
        if c != 0.0 {
            self.nx = self.nx.max(i + 1);
            self.ny = self.ny.max(j + 1);
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nx).flat_map(move |i| {
            (0..self.ny).filter_map(move |j| {
                let c = self.coeffs[i][j];
                (c != 0.0).then_some((i, j, c))
            })
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }

    pub fn degree_x(&self) -> Option<usize> {
        self.terms().map(|(i, _, _)| i).max()
    }

    pub fn degree_y(&self) -> Option<usize> {
        self.terms().map(|(_, j, _)| j).max()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms().map(|(i, j, _)| i + j).max()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms().fold(0.0, |m, (_, _, c)| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (0..self.nx).rev().fold(0.0, |acc, i| {
            let row = (0..self.ny)
                .rev()
                .fold(0.0, |r, j| r * y + self.coeffs[i][j]);
            acc * x + row
        })
    }

    /// Partial derivatives `(∂/∂x, ∂/∂y)` at a point.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (i, j, c) in self.terms() {
            if i > 0 {
                gx += c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                gy += c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
            }
        }
        (gx, gy)
    }

    /// `Σ |c| |x|ⁱ |y|ʲ`, the magnitude scale of an evaluation.
    pub fn eval_magnitude(&self, x: f64, y: f64) -> f64 {
        self.terms()
            .map(|(i, j, c)| c.abs() * x.abs().powi(i as i32) * y.abs().powi(j as i32))
            .sum()
    }

    /// Coefficient of `xᵏ`, as a polynomial in `y`.
    pub fn collect_x(&self, k: usize) -> Poly1 {
        if k >= N {
            return Poly1::zero();
        }
        Poly1::new(&self.coeffs[k][..self.ny])
    }

    /// Coefficient of `yᵏ`, as a polynomial in `x`.
    pub fn collect_y(&self, k: usize) -> Poly1 {
        if k >= N {
            return Poly1::zero();
        }
        let col: Vec<f64> = (0..self.nx).map(|i| self.coeffs[i][k]).collect();
        Poly1::new(&col)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in self.terms() {
            out.set(i, j, c * s);
        }
        out
    }
}

impl Default for Poly2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self.terms().collect();
        f.debug_tuple("Poly2").field(&terms).finish()
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        let mut out = self;
        for (i, j, c) in rhs.terms() {
            let v = out.coeffs[i][j] + c;
            out.set(i, j, v);
        }
        out
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        self + (-rhs)
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in rhs.terms() {
                let v = out.coeff(i1 + i2, j1 + j2) + c1 * c2;
                out.set(i1 + i2, j1 + j2, v);
            }
        }
        out
    }
}

impl Mul<f64> for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: f64) -> Poly2 {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly2_strategy() -> impl Strategy<Value = Poly2> {
        prop::collection::vec((0usize..=4, 0usize..=4, -5.0f64..5.0), 1..12)
            .prop_map(|t| Poly2::from_terms(&t))
    }

    proptest! {
        #[test]
        fn arithmetic_agrees_with_pointwise(
            p in poly2_strategy(), q in poly2_strategy(), x in -2.0f64..2.0, y in -2.0f64..2.0
        ) {
            let scale = (p.eval_magnitude(x, y) + 1.0) * (q.eval_magnitude(x, y) + 1.0);
            prop_assert!(((p + q).eval(x, y) - (p.eval(x, y) + q.eval(x, y))).abs() <= 1e-10 * scale);
            prop_assert!(((p * q).eval(x, y) - p.eval(x, y) * q.eval(x, y)).abs() <= 1e-10 * scale);
            if !p.is_zero() && !q.is_zero() {
                prop_assert_eq!((p * q).degree_x().unwrap(), p.degree_x().unwrap() + q.degree_x().unwrap());
                prop_assert_eq!((p * q).degree_y().unwrap(), p.degree_y().unwrap() + q.degree_y().unwrap());
            }
        }
    }

    #[test]
    fn collect_and_gradient() {
        // 3 + 2x y² − x² y
        let p = Poly2::from_terms(&[(0, 0, 3.0), (1, 2, 2.0), (2, 1, -1.0)]);
        assert_eq!(p.collect_y(2).coeffs(), &[0.0, 2.0]);
        assert_eq!(p.collect_x(2).coeffs(), &[0.0, -1.0]);
        assert_eq!(p.total_degree(), Some(3));
        let (gx, gy) = p.gradient(1.5, -2.0);
        assert!((gx - (2.0 * 4.0 - 2.0 * 1.5 * -2.0)).abs() < 1e-12);
        assert!((gy - (4.0 * 1.5 * -2.0 - 1.5 * 1.5)).abs() < 1e-12);
        assert_eq!(p.eval(1.0, 1.0), 4.0);
    }
}
