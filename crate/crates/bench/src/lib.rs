//! Command-line harness around `mppose-core`: JSON instance files, CSV trial
//! reports, and the synthetic experiments.

// `!(x > tol)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod experiments;
pub mod instance;
pub mod report;
