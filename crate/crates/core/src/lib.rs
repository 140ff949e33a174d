//! Quantum Ziv–Zakai bounds on phase estimation for coherent, single-mode
//! squeezed vacuum and two-mode squeezed vacuum probes under photon loss and
//! phase diffusion.
//!
//! The analytic path ([`fidelity`], [`bounds`]) is generic over [`Scalar`]
//! (`f32` or `f64`); the `f64` aliases below cover the common case. [`oracle`]
//! re-derives every closed-form fidelity by brute force in a truncated Fock
//! basis, and [`sweep`] drives the parameter scans behind the CLI.

pub mod bounds;
pub mod error;
pub mod fidelity;
pub mod optimize;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod states;
pub mod sweep;
pub mod verify;

pub use bounds::{
    crossover_kappa, generalized_fidelity, qzzb, zzb_cs_loss_closed_form, zzb_pair, zzb_sine_relaxed, zzb_tight,
    BoundForm, CrossoverOptions,
};
pub use error::{QzzbError, Result};
pub use fidelity::{
    fidelity_curve, fq_diffusion, fq_loss, ideal_fidelity, maximize_lambda, FidelityProfile, MaximizedFidelity,
};
pub use scalar::Scalar;
pub use special::{dawson, erfi};
pub use states::{ChannelKind, StateKind};

pub type ProbeState = states::ProbeState<f64>;
pub type NoiseChannel = states::NoiseChannel<f64>;
pub type PriorWindow = states::PriorWindow<f64>;
pub type LossKernel = fidelity::LossKernel<f64>;
pub type DiffusionKernel = fidelity::DiffusionKernel<f64>;
pub type FidelityCurve = fidelity::FidelityCurve<f64>;
pub type BoundResult = bounds::BoundResult<f64>;
pub type BoundPair = bounds::BoundPair<f64>;
pub type GeneralizedFidelity = bounds::GeneralizedFidelity<f64>;

pub type ProbeStateF32 = states::ProbeState<f32>;
pub type NoiseChannelF32 = states::NoiseChannel<f32>;
pub type PriorWindowF32 = states::PriorWindow<f32>;
