//! Absolute pose of a calibrated multi-camera rig from minimal sets of mixed
//! point and line correspondences.

// `!(x > tol)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod geometry;
pub mod metrics;
pub mod poly;
pub mod ransac;
pub mod sim;
pub mod solver;
