//! Probe states, noise channels and the uniform prior window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QzzbError, Result};
use crate::scalar::Scalar;

/// The three Gaussian probe resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateKind {
    /// Coherent state.
    #[serde(rename = "cs")]
    Coherent,
    /// Single-mode squeezed vacuum.
    #[serde(rename = "smsvs")]
    SingleModeSqueezed,
    /// Two-mode squeezed vacuum. The phase generator acts on the first mode only.
    #[serde(rename = "tmsvs")]
    TwoModeSqueezed,
}

impl StateKind {
    pub const ALL: [StateKind; 3] = [
        StateKind::Coherent,
        StateKind::SingleModeSqueezed,
        StateKind::TwoModeSqueezed,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StateKind::Coherent => "cs",
            StateKind::SingleModeSqueezed => "smsvs",
            StateKind::TwoModeSqueezed => "tmsvs",
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StateKind {
    type Err = QzzbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" | "coherent" => Ok(StateKind::Coherent),
            "smsvs" | "smsv" | "squeezed" => Ok(StateKind::SingleModeSqueezed),
            "tmsvs" | "tmsv" | "two-mode" => Ok(StateKind::TwoModeSqueezed),
            other => Err(QzzbError::domain(format!("unknown state kind '{other}'"))),
        }
    }
}

/// A probe state keyed by its mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeState<T> {
    kind: StateKind,
    mean_photon_number: T,
}

impl<T: Scalar> ProbeState<T> {
    pub fn new(kind: StateKind, mean_photon_number: T) -> Result<Self> {
        if !(mean_photon_number >= T::zero()) || !mean_photon_number.is_finite() {
            return Err(QzzbError::domain(format!(
                "mean photon number must be finite and >= 0, got {mean_photon_number}"
            )));
        }
        Ok(ProbeState {
            kind,
            mean_photon_number,
        })
    }

    pub fn coherent(n: T) -> Result<Self> {
        Self::new(StateKind::Coherent, n)
    }

    pub fn single_mode_squeezed(n: T) -> Result<Self> {
        Self::new(StateKind::SingleModeSqueezed, n)
    }

    pub fn two_mode_squeezed(n: T) -> Result<Self> {
        Self::new(StateKind::TwoModeSqueezed, n)
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn mean_photon_number(&self) -> T {
        self.mean_photon_number
    }

    /// Real, non-negative coherent amplitude `sqrt(N)`; `None` for squeezed states.
    pub fn coherent_amplitude(&self) -> Option<T> {
        match self.kind {
            StateKind::Coherent => Some(self.mean_photon_number.sqrt()),
            _ => None,
        }
    }

    /// Squeeze parameter: `asinh(sqrt(N))` for the single-mode state,
    /// `asinh(sqrt(N/2))` for the two-mode state, `None` for coherent states.
    pub fn squeeze_parameter(&self) -> Option<T> {
        let n = self.mean_photon_number;
        match self.kind {
            StateKind::Coherent => None,
            StateKind::SingleModeSqueezed => Some(n.sqrt().asinh()),
            StateKind::TwoModeSqueezed => Some((n / T::lit(2.0)).sqrt().asinh()),
        }
    }
}

/// Mean photon number carried by a squeezed vacuum with squeeze parameter `r`.
pub fn photon_number_from_squeeze<T: Scalar>(kind: StateKind, r: T) -> Option<T> {
    let s = r.sinh();
    match kind {
        StateKind::Coherent => None,
        StateKind::SingleModeSqueezed => Some(s * s),
        StateKind::TwoModeSqueezed => Some(T::lit(2.0) * s * s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    #[serde(rename = "loss")]
    PhotonLoss,
    #[serde(rename = "diffusion")]
    PhaseDiffusion,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::PhotonLoss => "loss",
            ChannelKind::PhaseDiffusion => "diffusion",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelKind {
    type Err = QzzbError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "loss" | "photon-loss" => Ok(ChannelKind::PhotonLoss),
            "diffusion" | "phase-diffusion" => Ok(ChannelKind::PhaseDiffusion),
            other => Err(QzzbError::domain(format!("unknown channel kind '{other}'"))),
        }
    }
}

/// Photon loss with transmissivity `eta` in `[0, 1]`, or phase diffusion with `kappa >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel<T> {
    kind: ChannelKind,
    strength: T,
}

impl<T: Scalar> NoiseChannel<T> {
    pub fn new(kind: ChannelKind, strength: T) -> Result<Self> {
        let ok = match kind {
            ChannelKind::PhotonLoss => strength >= T::zero() && strength <= T::one(),
            ChannelKind::PhaseDiffusion => strength >= T::zero() && strength.is_finite(),
        };
        if !ok {
            return Err(QzzbError::domain(match kind {
                ChannelKind::PhotonLoss => format!("loss strength eta must lie in [0, 1], got {strength}"),
                ChannelKind::PhaseDiffusion => format!("diffusion strength kappa must be >= 0, got {strength}"),
            }));
        }
        Ok(NoiseChannel { kind, strength })
    }

    pub fn photon_loss(eta: T) -> Result<Self> {
        Self::new(ChannelKind::PhotonLoss, eta)
    }

    pub fn phase_diffusion(kappa: T) -> Result<Self> {
        Self::new(ChannelKind::PhaseDiffusion, kappa)
    }

    /// The noiseless channel, expressed as lossless transmission.
    pub fn ideal() -> Self {
        NoiseChannel {
            kind: ChannelKind::PhotonLoss,
            strength: T::one(),
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn strength(&self) -> T {
        self.strength
    }

    /// `eta == 1` or `kappa == 0`.
    pub fn is_ideal(&self) -> bool {
        match self.kind {
            ChannelKind::PhotonLoss => self.strength == T::one(),
            ChannelKind::PhaseDiffusion => self.strength == T::zero(),
        }
    }
}

/// Uniform prior of width `width` centred on `mean`. Bounds depend on the width only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorWindow<T> {
    width: T,
    mean: T,
}

impl<T: Scalar> PriorWindow<T> {
    pub fn new(width: T, mean: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() {
            return Err(QzzbError::domain(format!("window width must be > 0, got {width}")));
        }
        Ok(PriorWindow { width, mean })
    }

    pub fn with_width(width: T) -> Result<Self> {
        Self::new(width, width / T::lit(2.0))
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    /// `W^2 / 12`, the tight bound for a fidelity identically one.
    pub fn ceiling(&self) -> T {
        self.width * self.width / T::lit(12.0)
    }

    /// Prior density `1/W` inside the window, zero outside.
    pub fn density(&self, x: T) -> T {
        let half = self.width / T::lit(2.0);
        if (x - self.mean).abs() <= half {
            T::one() / self.width
        } else {
            T::zero()
        }
    }
}

impl<T: Scalar> Default for PriorWindow<T> {
    fn default() -> Self {
        PriorWindow {
            width: T::TAU(),
            mean: T::PI(),
        }
    }
}
