//! Teleportation of states and gates, its noise model, and commutator-built gates.

pub mod commutator;
pub mod noise;
pub mod protocol;

pub use commutator::{commutator_error, commutator_target, group_commutator, loglog_slope};
pub use noise::{
    compose_noisy_gate, detector_sigma, sample_kernel, sigma_from, transfer_fock, transfer_gaussian, LinearErrorModel, NoisyGate,
};
pub use protocol::{
    check_teleportable, correction_for, cvqt, teleport_gate, Backend, Diagnostics, OutcomeRecord, Squeezing, TeleportConfig,
    TeleportState,
};
