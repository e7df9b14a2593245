//! Numerical toolkit for sparse Wigner matrices and stepped kernels.
//!
//! The crate solves quadratic vector equations (QVE) for stepped kernels,
//! computes their spectral measures and tree moments, evaluates large
//! deviation rate functions, samples typical and tilted random matrices, and
//! checks the identities and inequalities relating all of these.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod io;
pub mod kernel;
pub mod matrices;
pub mod measure;
pub mod qve;
pub mod rate;
pub mod suites;
pub mod trees;

pub use error::{Error, Result};
pub use kernel::{Partition, Relabel, StepFunction, StepKernel};
pub use measure::ProbMeasure1D;
