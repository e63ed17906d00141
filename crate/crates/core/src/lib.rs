//! Exact construction and verification of nested-projector braid matrices
//! `R̂(θ)` for odd dimensions `N = 2p − 1`.
//!
//! All arithmetic is exact: coefficients live in Q(√2) and the spectral
//! parameter enters only through finite sums of exponentials, so every
//! functional identity is checked as an exact symbolic residual.

pub mod algebra;
pub mod braid;
pub mod error;
pub mod expansion;
pub mod operators;
pub mod projectors;
pub mod report;

pub use algebra::{ExpSum, ExponentMap, Rational, Scalar, SparseMatrix};
pub use error::{Error, Result};
pub use projectors::{MergedLabel, OddDim, ProjectorLabel, Sign};
pub use report::VerificationReport;
