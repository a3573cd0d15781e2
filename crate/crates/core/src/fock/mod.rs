//! Truncated number-basis representation.

pub mod framed;
pub mod homodyne;
pub mod matrix;
pub mod state;

pub use framed::{FramedState, VectorPolicy};
pub use homodyne::{hermite_functions, homodyne_sample, HomodyneSampler};
pub use matrix::{
    annihilation, converge, displacement_matrix, exp_hermitian, gate_matrix, gate_matrix_converged, gate_matrix_full,
    max_diff_mod_phase, operator_matrix, unitarity_defect, Convergence, ExpMethod, OperatorMatrix, Truncation,
};
pub use state::{fidelity, tmsv, Ensemble, FockState};
