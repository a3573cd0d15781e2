//! Continuous-variable gate teleportation.
//!
//! Conventions: ħ = 1, q = (a + a†)/√2, p = i(a† − a)/√2, vacuum quadrature variance 1/2,
//! phase-space ordering (q1, p1, ..., qn, pn).

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod linalg;
pub mod phase_space;
pub mod rng;
pub mod teleport;

pub use error::{Error, Result};
