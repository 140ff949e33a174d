//! Ziv–Zakai bounds from fidelity profiles.
//!
//! With a uniform prior of width `W` and fidelity bound `F(beta)`:
//!
//! * tight form: `int_0^W (beta/2)(1 - beta/W) [1 - sqrt(1 - F)] dbeta`
//! * sine-relaxed form: `int_0^W (W/16) F sin(pi beta / W) dbeta`
//!
//! The relaxed integrand lower-bounds the tight one pointwise, so
//! `tight >= relaxed` always. For a coherent state under loss with `W = 2 pi`
//! the relaxed form has a closed form in terms of the Dawson function.

use serde::Serialize;

use crate::error::{QzzbError, Result};
use crate::fidelity::{FidelityCurve, FidelityProfile, MaximizedFidelity};
use crate::quadrature::{integrate_many, QuadratureOptions};
use crate::scalar::{sin_pi, Scalar};
use crate::special::dawson;
use crate::states::{NoiseChannel, PriorWindow, ProbeState, StateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum BoundForm {
    #[serde(rename = "tight")]
    Tight,
    #[serde(rename = "sine-relaxed")]
    SineRelaxed,
    #[serde(rename = "closed-form-cs")]
    ClosedFormCs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult<T> {
    /// Mean-square error bound in rad^2.
    pub value: T,
    pub form: BoundForm,
    pub quadrature_error_estimate: T,
    pub window: PriorWindow<T>,
}

/// Both forms from one pass over the fidelity profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair<T> {
    pub tight: BoundResult<T>,
    pub sine_relaxed: BoundResult<T>,
}

const QUAD_REL_TOL: f64 = 1e-9;
const QUAD_ABS_TOL: f64 = 1e-15;
/// Accepted quadrature error relative to `max(value, 1e-6)`.
const QUAD_ACCEPT: f64 = 1e-8;

fn quad_options() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: QUAD_ABS_TOL,
        rel_tol: QUAD_REL_TOL,
        max_panels: 4000,
    }
}

/// `1 - sqrt(1 - F)` computed as `F / (1 + sqrt(1 - F))`.
#[inline]
fn error_probability_weight<T: Scalar>(f: T) -> T {
    let f = f.max(T::zero()).min(T::one());
    f / (T::one() + (T::one() - f).sqrt())
}

#[inline]
fn tight_integrand<T: Scalar>(f: T, beta: T, width: T) -> T {
    let t = beta / width;
    beta / T::lit(2.0) * (T::one() - t) * error_probability_weight(f)
}

#[inline]
fn relaxed_integrand<T: Scalar>(f: T, beta: T, width: T) -> T {
    width / T::lit(16.0) * f * sin_pi(beta / width)
}

fn check_coverage<T: Scalar, P: FidelityProfile<T> + ?Sized>(profile: &P, width: T) -> Result<()> {
    if let Some((lo, hi)) = profile.coverage() {
        let slack = T::tol(1e-12) * width;
        if lo > slack || hi < width - slack {
            return Err(QzzbError::domain(format!(
                "fidelity profile covers [{lo}, {hi}], need [0, {width}]"
            )));
        }
    }
    Ok(())
}

/// Integrates both bound forms over `[0, W]`, splitting at the profile's breakpoints.
pub fn zzb_pair<T: Scalar, P: FidelityProfile<T> + ?Sized>(
    profile: &P,
    window: &PriorWindow<T>,
) -> Result<BoundPair<T>> {
    let width = window.width();
    check_coverage(profile, width)?;
    let mut edges = vec![T::zero()];
    edges.extend(profile.breakpoints().into_iter().filter(|&b| b > T::zero() && b < width));
    edges.push(width);

    let opts = quad_options();
    let mut value = [T::zero(); 2];
    let mut error = [T::zero(); 2];
    for seg in edges.windows(2) {
        if seg[1] <= seg[0] {
            continue;
        }
        let q = integrate_many(
            |beta| {
                let f = profile.fidelity(beta)?;
                if !f.is_finite() {
                    return Err(QzzbError::Numerical(format!("non-finite fidelity at beta={beta}")));
                }
                Ok([tight_integrand(f, beta, width), relaxed_integrand(f, beta, width)])
            },
            seg[0],
            seg[1],
            &opts,
        )?;
        for c in 0..2 {
            value[c] = value[c] + q.value[c];
            error[c] = error[c] + q.error[c];
        }
    }
    for c in 0..2 {
        let budget = T::tol(QUAD_ACCEPT) * value[c].abs().max(T::lit(1e-6));
        if error[c] > budget {
            return Err(QzzbError::Numerical(format!(
                "quadrature error {} exceeds {} (value {})",
                error[c], budget, value[c]
            )));
        }
    }
    let make = |c: usize, form| BoundResult {
        value: value[c],
        form,
        quadrature_error_estimate: error[c],
        window: *window,
    };
    Ok(BoundPair {
        tight: make(0, BoundForm::Tight),
        sine_relaxed: make(1, BoundForm::SineRelaxed),
    })
}

pub fn zzb_tight<T: Scalar, P: FidelityProfile<T> + ?Sized>(
    profile: &P,
    window: &PriorWindow<T>,
) -> Result<BoundResult<T>> {
    zzb_pair(profile, window).map(|p| p.tight)
}

pub fn zzb_sine_relaxed<T: Scalar, P: FidelityProfile<T> + ?Sized>(
    profile: &P,
    window: &PriorWindow<T>,
) -> Result<BoundResult<T>> {
    zzb_pair(profile, window).map(|p| p.sine_relaxed)
}

/// Both bound forms for a state sent through a channel.
pub fn qzzb<T: Scalar>(
    state: &ProbeState<T>,
    channel: &NoiseChannel<T>,
    window: &PriorWindow<T>,
) -> Result<BoundPair<T>> {
    zzb_pair(&MaximizedFidelity::new(*state, *channel), window)
}

/// Closed-form relaxed bound for a coherent state under loss, `W = 2 pi`.
///
/// Evaluated as `(pi/4) D(2 sqrt(x)) / sqrt(x)` with `x = eta N`, which equals
/// `pi^{3/2} e^{-4x} erfi(2 sqrt(x)) / (8 sqrt(x))` without overflowing.
pub fn zzb_cs_loss_closed_form<T: Scalar>(n: T, eta: T) -> Result<T> {
    if !(n >= T::zero()) || !n.is_finite() {
        return Err(QzzbError::domain(format!("mean photon number must be >= 0, got {n}")));
    }
    if !(eta >= T::zero() && eta <= T::one()) {
        return Err(QzzbError::domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    let x = eta * n;
    if x == T::zero() {
        return Ok(T::FRAC_PI_2());
    }
    let root = x.sqrt();
    Ok(T::FRAC_PI_4() * dawson(T::lit(2.0) * root) / root)
}

/// `F~(beta) = (W/16) F(beta) sin(pi beta / W)` on a sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedFidelity<T> {
    pub betas: Vec<T>,
    pub values: Vec<T>,
}

pub fn generalized_fidelity<T: Scalar>(
    curve: &FidelityCurve<T>,
    window: &PriorWindow<T>,
) -> Result<GeneralizedFidelity<T>> {
    let width = window.width();
    if curve.betas.iter().any(|&b| b < T::zero() || b > width) {
        return Err(QzzbError::domain("curve samples must lie in [0, W]"));
    }
    let values = curve
        .betas
        .iter()
        .zip(&curve.values)
        .map(|(&b, &f)| relaxed_integrand(f, b, width))
        .collect();
    Ok(GeneralizedFidelity {
        betas: curve.betas.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverOptions {
    pub form: BoundForm,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance: f64,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        CrossoverOptions {
            form: BoundForm::SineRelaxed,
            tolerance: 1e-5,
        }
    }
}

/// Diffusion strength at which two states' bounds cross, by bisection.
pub fn crossover_kappa<T: Scalar>(
    a: StateKind,
    b: StateKind,
    n: T,
    bracket: (T, T),
    window: &PriorWindow<T>,
    opts: &CrossoverOptions,
) -> Result<T> {
    let (mut lo, mut hi) = bracket;
    if !(lo >= T::zero()) || !(hi > lo) {
        return Err(QzzbError::domain(format!("invalid kappa bracket [{lo}, {hi}]")));
    }
    let state_a = ProbeState::new(a, n)?;
    let state_b = ProbeState::new(b, n)?;
    let diff = |kappa: T| -> Result<T> {
        let ch = NoiseChannel::phase_diffusion(kappa)?;
        let pa = qzzb(&state_a, &ch, window)?;
        let pb = qzzb(&state_b, &ch, window)?;
        Ok(match opts.form {
            BoundForm::Tight => pa.tight.value - pb.tight.value,
            _ => pa.sine_relaxed.value - pb.sine_relaxed.value,
        })
    };
    let mut d_lo = diff(lo)?;
    let d_hi = diff(hi)?;
    let bracket_err = || QzzbError::Bracket {
        lo: bracket.0.as_f64(),
        hi: bracket.1.as_f64(),
    };
    if d_lo == T::zero() && d_hi == T::zero() {
        return Err(bracket_err());
    }
    if d_lo == T::zero() {
        return Ok(lo);
    }
    if d_hi == T::zero() {
        return Ok(hi);
    }
    if (d_lo > T::zero()) == (d_hi > T::zero()) {
        return Err(bracket_err());
    }
    let tol = T::tol(opts.tolerance);
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        let d_mid = diff(mid)?;
        if d_mid == T::zero() {
            return Ok(mid);
        }
        if (d_mid > T::zero()) == (d_lo > T::zero()) {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}
