//! Exact arithmetic: Q(√2) scalars, exponential sums and sparse matrices.

pub mod expsum;
pub mod json;
pub mod matrix;
pub mod rational;
pub mod scalar;

pub use expsum::{ExpSum, ExponentMap, Term, MAX_ARITY};
pub use matrix::{linear_combination, SparseMatrix};
pub use rational::{format_rational, int, parse_rational, rat, Rational};
pub use scalar::Scalar;
