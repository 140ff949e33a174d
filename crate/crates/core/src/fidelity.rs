//! Variational fidelity lower bounds and their maximization.
//!
//! For photon loss the purified overlap is `|<psi| Y^n |psi>|^2` with
//! `Y = eta e^{-i beta} + (1 - eta) e^{i beta lambda1}`; it depends on `lambda1`
//! only through the phase `phi = beta * lambda1`, so the search runs over
//! `phi` in `[-pi, pi]`.
//!
//! For phase diffusion the overlap is `Theta * |<psi| e^{i beta (lambda2 - 1) n} |psi>|^2`
//! with `Theta = exp(-(beta lambda2)^2 / 8 kappa^2)`. Writing `u = beta * lambda2`,
//! the state factor is `2pi`-periodic in `u` while `Theta` decays in `|u|`, so every
//! maximizer has a representative with `|u| <= pi`; the search runs over that interval.

use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{QzzbError, Result};
use crate::optimize::{maximize, MaximizeOptions};
use crate::scalar::Scalar;
use crate::states::{ChannelKind, NoiseChannel, ProbeState, StateKind};

/// Photon-loss kernel `(eta, beta, lambda1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossKernel<T> {
    pub eta: T,
    pub beta: T,
    pub lambda1: T,
}

impl<T: Scalar> LossKernel<T> {
    pub fn new(eta: T, beta: T, lambda1: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(QzzbError::domain(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !beta.is_finite() || !lambda1.is_finite() {
            return Err(QzzbError::domain("beta and lambda1 must be finite"));
        }
        Ok(LossKernel { eta, beta, lambda1 })
    }

    /// `Y(eta, beta, lambda1)`; `|Y| <= 1` always and `Y = 1` at `beta = 0`.
    pub fn upsilon(&self) -> Complex<T> {
        upsilon_from_phase(self.eta, self.beta, self.beta * self.lambda1)
    }
}

#[inline]
fn upsilon_from_phase<T: Scalar>(eta: T, beta: T, phi: T) -> Complex<T> {
    Complex::from_polar(eta, -beta) + Complex::from_polar(T::one() - eta, phi)
}

/// Phase-diffusion kernel `(kappa, beta, lambda2)` with `kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionKernel<T> {
    pub kappa: T,
    pub beta: T,
    pub lambda2: T,
}

impl<T: Scalar> DiffusionKernel<T> {
    pub fn new(kappa: T, beta: T, lambda2: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(QzzbError::domain(format!(
                "diffusion kernel needs kappa > 0 (route kappa = 0 to the ideal fidelity), got {kappa}"
            )));
        }
        if !beta.is_finite() || !lambda2.is_finite() {
            return Err(QzzbError::domain("beta and lambda2 must be finite"));
        }
        Ok(DiffusionKernel { kappa, beta, lambda2 })
    }

    /// Environment overlap factor `exp(-beta^2 lambda2^2 / (8 kappa^2))`.
    pub fn theta(&self) -> T {
        theta(self.kappa, self.beta * self.lambda2)
    }

    /// `1 - cos(b (lambda2 - 1))`.
    pub fn lambda_penalty(&self, b: T) -> T {
        one_minus_cos(b * (self.lambda2 - T::one()))
    }
}

#[inline]
fn theta<T: Scalar>(kappa: T, u: T) -> T {
    (-(u * u) / (T::lit(8.0) * kappa * kappa)).exp()
}

/// `1 - cos(x)` without cancellation near zero.
#[inline]
fn one_minus_cos<T: Scalar>(x: T) -> T {
    let s = (x / T::lit(2.0)).sin();
    T::lit(2.0) * s * s
}

/// `|<psi| e^{-i t n} |psi>|^2` expressed through `1 - cos(t)` (and `1 - cos(2t)`).
fn dephased_overlap<T: Scalar>(state: &ProbeState<T>, t: T) -> T {
    let n = state.mean_photon_number();
    match state.kind() {
        StateKind::Coherent => (-T::lit(2.0) * n * one_minus_cos(t)).exp(),
        StateKind::SingleModeSqueezed => {
            let penalty = one_minus_cos(T::lit(2.0) * t);
            T::one() / (T::one() + T::lit(2.0) * n * (T::one() + n) * penalty).sqrt()
        }
        StateKind::TwoModeSqueezed => {
            T::one() / (T::one() + n * (T::one() + n / T::lit(2.0)) * one_minus_cos(t))
        }
    }
}

/// Purified-overlap fidelity bound under photon loss.
pub fn fq_loss<T: Scalar>(state: &ProbeState<T>, kernel: &LossKernel<T>) -> T {
    fq_loss_from_upsilon(state, kernel.upsilon())
}

fn fq_loss_from_upsilon<T: Scalar>(state: &ProbeState<T>, y: Complex<T>) -> T {
    let n = state.mean_photon_number();
    let one = Complex::new(T::one(), T::zero());
    let value = match state.kind() {
        StateKind::Coherent => (T::lit(2.0) * n * (y.re - T::one())).exp(),
        StateKind::SingleModeSqueezed => {
            // 1 / |sqrt(1 + N (1 - Y^2))|^2 with the principal root
            let z = one + (one - y * y).scale(n);
            let root = z.sqrt();
            T::one() / root.norm_sqr()
        }
        StateKind::TwoModeSqueezed => {
            let z = one + (one - y).scale(n / T::lit(2.0));
            T::one() / z.norm_sqr()
        }
    };
    clamp_unit(value)
}

/// Purified-overlap fidelity bound under phase diffusion. Rejects `kappa == 0`.
pub fn fq_diffusion<T: Scalar>(state: &ProbeState<T>, kernel: &DiffusionKernel<T>) -> Result<T> {
    // re-validate: fields are public
    let kernel = DiffusionKernel::new(kernel.kappa, kernel.beta, kernel.lambda2)?;
    let u = kernel.beta * kernel.lambda2;
    Ok(fq_diffusion_from_u(state, kernel.kappa, kernel.beta, u))
}

#[inline]
fn fq_diffusion_from_u<T: Scalar>(state: &ProbeState<T>, kappa: T, beta: T, u: T) -> T {
    clamp_unit(theta(kappa, u) * dephased_overlap(state, beta - u))
}

/// Fidelity `|<psi| e^{-i beta n} |psi>|^2` of the noiseless encoding.
pub fn ideal_fidelity<T: Scalar>(state: &ProbeState<T>, beta: T) -> T {
    clamp_unit(dephased_overlap(state, beta))
}

#[inline]
fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Maximized bound at one `beta` and the variational parameter attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalOptimum<T> {
    pub fidelity: T,
    /// `lambda1` (loss) or `lambda2` (diffusion); zero on the ideal path.
    pub lambda: T,
    /// Search coordinate `beta * lambda`.
    pub phase: T,
}

pub fn maximize_lambda<T: Scalar>(
    state: &ProbeState<T>,
    channel: &NoiseChannel<T>,
    beta: T,
) -> Result<VariationalOptimum<T>> {
    maximize_lambda_with(state, channel, beta, &MaximizeOptions::default())
}

pub fn maximize_lambda_with<T: Scalar>(
    state: &ProbeState<T>,
    channel: &NoiseChannel<T>,
    beta: T,
    opts: &MaximizeOptions,
) -> Result<VariationalOptimum<T>> {
    if !(beta >= T::zero()) || !beta.is_finite() {
        return Err(QzzbError::domain(format!("beta must be finite and >= 0, got {beta}")));
    }
    if beta == T::zero() {
        return Ok(VariationalOptimum {
            fidelity: T::one(),
            lambda: T::zero(),
            phase: T::zero(),
        });
    }
    if channel.is_ideal() {
        return Ok(VariationalOptimum {
            fidelity: ideal_fidelity(state, beta),
            lambda: T::zero(),
            phase: T::zero(),
        });
    }
    let strength = channel.strength();
    let best = match channel.kind() {
        ChannelKind::PhotonLoss => maximize(
            |phi| fq_loss_from_upsilon(state, upsilon_from_phase(strength, beta, phi)),
            -T::PI(),
            T::PI(),
            opts,
        ),
        ChannelKind::PhaseDiffusion => maximize(
            |u| fq_diffusion_from_u(state, strength, beta, u),
            -T::PI(),
            T::PI(),
            opts,
        ),
    };
    Ok(VariationalOptimum {
        fidelity: best.value,
        lambda: best.x / beta,
        phase: best.x,
    })
}

/// Maximized fidelity sampled on a grid of phase differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve<T> {
    pub state: ProbeState<T>,
    pub channel: NoiseChannel<T>,
    pub betas: Vec<T>,
    pub values: Vec<T>,
    pub lambda_opt: Vec<T>,
}

pub fn fidelity_curve<T: Scalar>(
    state: &ProbeState<T>,
    channel: &NoiseChannel<T>,
    betas: &[T],
) -> Result<FidelityCurve<T>> {
    if betas.is_empty() {
        return Err(QzzbError::domain("beta grid is empty"));
    }
    if betas.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QzzbError::domain("beta grid must be sorted ascending"));
    }
    let optima: Vec<VariationalOptimum<T>> = betas
        .par_iter()
        .map(|&b| maximize_lambda(state, channel, b))
        .collect::<Result<_>>()?;
    Ok(FidelityCurve {
        state: *state,
        channel: *channel,
        betas: betas.to_vec(),
        values: optima.iter().map(|o| o.fidelity).collect(),
        lambda_opt: optima.iter().map(|o| o.lambda).collect(),
    })
}

/// A fidelity bound as a function of the phase difference, consumed by the bounds.
pub trait FidelityProfile<T: Scalar>: Sync {
    fn fidelity(&self, beta: T) -> Result<T>;

    /// Interval where the profile is defined; `None` means everywhere.
    fn coverage(&self) -> Option<(T, T)> {
        None
    }

    /// Points where the profile may have kinks; quadrature splits there.
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

/// `F(beta) = c` for all `beta`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFidelity<T>(pub T);

impl<T: Scalar> FidelityProfile<T> for ConstantFidelity<T> {
    fn fidelity(&self, _beta: T) -> Result<T> {
        Ok(self.0)
    }
}

/// Adapts a closure.
pub struct FnProfile<F>(pub F);

impl<T: Scalar, F: Fn(T) -> T + Sync> FidelityProfile<T> for FnProfile<F> {
    fn fidelity(&self, beta: T) -> Result<T> {
        Ok((self.0)(beta))
    }
}

/// Maximized fidelity of a state through a channel, memoized on `beta`.
pub struct MaximizedFidelity<T> {
    state: ProbeState<T>,
    channel: NoiseChannel<T>,
    cache: Mutex<HashMap<u64, VariationalOptimum<T>>>,
}

impl<T: Scalar> MaximizedFidelity<T> {
    pub fn new(state: ProbeState<T>, channel: NoiseChannel<T>) -> Self {
        MaximizedFidelity {
            state,
            channel,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn state(&self) -> &ProbeState<T> {
        &self.state
    }

    pub fn channel(&self) -> &NoiseChannel<T> {
        &self.channel
    }

    pub fn optimum(&self, beta: T) -> Result<VariationalOptimum<T>> {
        let key = beta.as_f64().to_bits();
        if let Some(hit) = self.cache.lock().expect("fidelity cache poisoned").get(&key) {
            return Ok(*hit);
        }
        let opt = maximize_lambda(&self.state, &self.channel, beta)?;
        self.cache.lock().expect("fidelity cache poisoned").insert(key, opt);
        Ok(opt)
    }

    pub fn cached_points(&self) -> usize {
        self.cache.lock().expect("fidelity cache poisoned").len()
    }
}

impl<T: Scalar> FidelityProfile<T> for MaximizedFidelity<T> {
    fn fidelity(&self, beta: T) -> Result<T> {
        self.optimum(beta).map(|o| o.fidelity)
    }
}

/// Piecewise-linear interpolation between samples.
impl<T: Scalar> FidelityProfile<T> for FidelityCurve<T> {
    fn fidelity(&self, beta: T) -> Result<T> {
        let (lo, hi) = (self.betas[0], self.betas[self.betas.len() - 1]);
        if beta < lo || beta > hi {
            return Err(QzzbError::domain(format!("beta {beta} outside sampled range [{lo}, {hi}]")));
        }
        let idx = self.betas.partition_point(|&b| b <= beta);
        if idx == 0 {
            return Ok(self.values[0]);
        }
        if idx >= self.betas.len() {
            return Ok(self.values[self.values.len() - 1]);
        }
        let (b0, b1) = (self.betas[idx - 1], self.betas[idx]);
        let (f0, f1) = (self.values[idx - 1], self.values[idx]);
        if b1 == b0 {
            return Ok(f1);
        }
        let t = (beta - b0) / (b1 - b0);
        Ok(f0 + (f1 - f0) * t)
    }

    fn coverage(&self) -> Option<(T, T)> {
        Some((self.betas[0], self.betas[self.betas.len() - 1]))
    }

    fn breakpoints(&self) -> Vec<T> {
        self.betas.clone()
    }
}
