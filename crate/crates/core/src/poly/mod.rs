//! Polynomial arithmetic, real-root finding and the two elimination steps the
//! solvers reduce to.

mod bivariate;
mod elimination;
mod roots;
mod univariate;

use thiserror::Error;

pub use bivariate::{Poly2, MAX_DEGREE_2};
pub use elimination::{eliminate_to_octic, intersect_quadrics};
pub use roots::{
    newton_polish, solve_cubic, solve_octic, solve_quadratic, solve_quartic, OCTIC_IMAG_TOL,
    OCTIC_TRIM_TOL, TRIM_TOL,
};
pub use univariate::{Poly1, MAX_DEGREE};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PolyError {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(&'static str),
    #[error("degenerate system: {0}")]
    DegenerateSystem(&'static str),
    #[error("unexpected polynomial shape: {0}")]
    ShapeError(&'static str),
}
