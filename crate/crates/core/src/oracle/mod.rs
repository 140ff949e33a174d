//! Brute-force Fock-space oracle.
//!
//! States, Kraus operators and channels are built explicitly as dense matrices
//! over a truncated Fock basis and compared against the closed-form fidelities.
//! Two-mode vectors use the index `a * (cutoff + 1) + b`; the phase generator,
//! loss and dephasing all act on mode `a`.

mod fidelity;
mod operators;
mod states;

pub use fidelity::{purified_overlap_diffusion, uhlmann_fidelity, uhlmann_fidelity_factored};
pub use operators::{
    annihilation, kraus_loss, normal_ordered_exponential, number_operator, z_operator, FockOperator,
};
pub use states::{dephased_state, fock_state, lossy_ensemble, lossy_state, required_cutoff, required_cutoff_for, FockVector, Modes};

/// Tail mass tolerated when truncating a state.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Default single-mode cutoff.
pub const DEFAULT_CUTOFF: usize = 60;
/// Default per-mode cutoff for the two-mode state.
pub const DEFAULT_TWO_MODE_CUTOFF: usize = 40;
