//! First-order methods for composite convex minimization.
//!
//! Problems have the form `min f(x) + r(x)` over a feasible set, with `f`
//! smooth (or subdifferentiable) and `r` prox-friendly. Every solver records a
//! [`trace::SolverTrace`] so convergence rates can be checked against their
//! non-asymptotic guarantees.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accelerated;
pub mod conditional_gradient;
pub mod dual_averaging;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod problem;
pub mod prox_gradient;
pub mod rng;
pub mod splitting;
pub mod trace;

pub use error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
