//! Exact operator algebra over the canonical variables q_i, p_i (ħ = 1).

pub mod decompose;
pub mod evolve;
pub mod expr;
pub mod gate;
pub mod hierarchy;
pub mod poly;

pub use decompose::{affine_generators, clifford_decompose, quadratic_form, QuadraticForm};
pub use evolve::{conjugate_pauli, conjugate_pauli_on, cubic_correction_exponent, heisenberg_evolve, DEFAULT_MAX_DEPTH};
pub use expr::{format_gate, parse_gate_expression, parse_polynomial};
pub use gate::{pauli_exponent, AffineSymplectic, GateSpec};
pub use hierarchy::{classify, HierarchyLevel};
pub use poly::{CanonicalPolynomial, Monomial};
