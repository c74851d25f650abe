use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Highest degree a [`Poly1`] can hold.
pub const MAX_DEGREE: usize = 16;

/// Dense univariate polynomial with coefficients in ascending degree.
///
/// Stored inline (no heap allocation) since every polynomial in the solvers
/// has degree ≤ 16.
#[derive(Clone, Copy, PartialEq)]
pub struct Poly1 {
    coeffs: [f64; MAX_DEGREE + 1],
    len: usize,
}

impl Poly1 {
    pub fn zero() -> Self {
        Self {
            coeffs: [0.0; MAX_DEGREE + 1],
            len: 0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&[c])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Self::new(&[c0, c1])
    }

    /// # Panics
    /// If more than `MAX_DEGREE + 1` coefficients are given.
    pub fn new(ascending: &[f64]) -> Self {
        assert!(
            ascending.len() <= MAX_DEGREE + 1,
            "polynomial degree {} exceeds {MAX_DEGREE}",
            ascending.len().saturating_sub(1)
        );
        let mut p = Self::zero();
        p.coeffs[..ascending.len()].copy_from_slice(ascending);
        p.len = ascending.len();
        p.strip_exact_zeros();
        p
    }

    /// Polynomial with the given real roots and leading coefficient 1.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::constant(1.0), |acc, &r| acc * Self::linear(-r, 1.0))
    }

    fn strip_exact_zeros(&mut self) {
        while self.len > 0 && self.coeffs[self.len - 1] == 0.0 {
            self.len -= 1;
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.len]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        if k < self.len {
            self.coeffs[k]
        } else {
            0.0
        }
    }

    /// Degree ignoring exact-zero leading terms; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.len.checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.len == 0
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops leading coefficients with `|c| ≤ rel_tol · max|cᵢ|`.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let cut = rel_tol * self.max_abs_coeff();
        let mut p = *self;
        while p.len > 0 && p.coeffs[p.len - 1].abs() <= cut {
            p.coeffs[p.len - 1] = 0.0;
            p.len -= 1;
        }
        p
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs().iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    /// `Σ |cᵢ| |x|ⁱ`: the magnitude scale of an evaluation at `x`.
    pub fn eval_magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Self {
        if self.len <= 1 {
            return Self::zero();
        }
        let mut d = Self::zero();
        for k in 1..self.len {
            d.coeffs[k - 1] = self.coeffs[k] * k as f64;
        }
        d.len = self.len - 1;
        d.strip_exact_zeros();
        d
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = *self;
        for c in &mut p.coeffs[..p.len] {
            *c *= s;
        }
        p.strip_exact_zeros();
        p
    }

    /// Divides by the largest coefficient magnitude (no-op for zero).
    pub fn normalized(&self) -> Self {
        let m = self.max_abs_coeff();
        if m > 0.0 {
            self.scale(1.0 / m)
        } else {
            *self
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| acc * *self)
    }
}

impl Default for Poly1 {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for Poly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly1").field(&self.coeffs()).finish()
    }
}

impl Add for Poly1 {
    type Output = Poly1;
    fn add(self, rhs: Poly1) -> Poly1 {
        let mut out = Poly1::zero();
        out.len = self.len.max(rhs.len);
        for k in 0..out.len {
            out.coeffs[k] = self.coeff(k) + rhs.coeff(k);
        }
        out.strip_exact_zeros();
        out
    }
}

impl Sub for Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: Poly1) -> Poly1 {
        self + (-rhs)
    }
}

impl Neg for Poly1 {
    type Output = Poly1;
    fn neg(self) -> Poly1 {
        self.scale(-1.0)
    }
}

impl Mul for Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: Poly1) -> Poly1 {
        if self.is_zero() || rhs.is_zero() {
            return Poly1::zero();
        }
        let len = self.len + rhs.len - 1;
        assert!(len <= MAX_DEGREE + 1, "product degree exceeds {MAX_DEGREE}");
        let mut out = Poly1::zero();
        for i in 0..self.len {
            for j in 0..rhs.len {
                out.coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        out.len = len;
        out.strip_exact_zeros();
        out
    }
}

impl Mul<f64> for Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: f64) -> Poly1 {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_strategy() -> impl Strategy<Value = Poly1> {
        prop::collection::vec(-10.0f64..10.0, 1..=9).prop_map(|c| Poly1::new(&c))
    }

    proptest! {
        #[test]
        fn add_and_mul_agree_with_pointwise(p in poly_strategy(), q in poly_strategy(), x in -3.0f64..3.0) {
            let sum = (p + q).eval(x);
            let direct = p.eval(x) + q.eval(x);
            let scale = p.eval_magnitude(x) + q.eval_magnitude(x) + 1.0;
            prop_assert!((sum - direct).abs() <= 1e-10 * scale);
            let prod = (p * q).eval(x);
            let direct = p.eval(x) * q.eval(x);
            let scale = p.eval_magnitude(x) * q.eval_magnitude(x) + 1.0;
            prop_assert!((prod - direct).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn degree_bookkeeping() {
        assert_eq!(Poly1::zero().degree(), None);
        assert_eq!(Poly1::new(&[1.0, 2.0, 0.0]).degree(), Some(1));
        let p = Poly1::new(&[1.0, 2.0, 3.0]);
        let q = Poly1::new(&[0.5, -1.0]);
        assert_eq!((p * q).degree(), Some(3));
        assert_eq!(Poly1::new(&[1.0, 1e-20]).trimmed(1e-13).degree(), Some(0));
    }

    #[test]
    fn derivative_and_horner() {
        let p = Poly1::new(&[1.0, -3.0, 0.0, 2.0]);
        assert_eq!(p.derivative().coeffs(), &[-3.0, 0.0, 6.0]);
        let (v, d) = p.eval_with_derivative(2.0);
        assert_eq!(v, 1.0 - 6.0 + 16.0);
        assert_eq!(d, -3.0 + 24.0);
        assert_eq!(Poly1::linear(3.0, 2.0).eval(0.5), 4.0);
    }

    #[test]
    fn from_roots_vanishes_at_roots() {
        let p = Poly1::from_roots(&[1.0, 2.0, 3.0]);
        assert_eq!(p.coeffs(), &[-6.0, 11.0, -6.0, 1.0]);
    }
}
