use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QzzbError, Result};
use crate::oracle::operators::{kraus_loss, FockOperator};
use crate::oracle::TAIL_TOLERANCE;
use crate::states::{ProbeState, StateKind};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Search limit when estimating the cutoff a state needs.
const MAX_CUTOFF_SEARCH: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modes {
    Single,
    Two,
}

impl Modes {
    pub fn dim(self, cutoff: usize) -> usize {
        match self {
            Modes::Single => cutoff + 1,
            Modes::Two => (cutoff + 1) * (cutoff + 1),
        }
    }

    pub fn mode_a_numbers(self, cutoff: usize) -> Vec<usize> {
        match self {
            Modes::Single => (0..=cutoff).collect(),
            Modes::Two => (0..self.dim(cutoff)).map(|i| i / (cutoff + 1)).collect(),
        }
    }
}

/// Truncated, renormalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amplitudes: DVector<Complex64>,
    pub cutoff: usize,
    pub modes: Modes,
    /// Probability mass beyond the cutoff before renormalization.
    pub tail_mass: f64,
}

impl FockVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn mode_a_numbers(&self) -> Vec<usize> {
        self.modes.mode_a_numbers(self.cutoff)
    }

    /// `e^{-i x n_a}` applied to the state.
    pub fn encoded(&self, x: f64) -> FockVector {
        let numbers = self.mode_a_numbers();
        let mut out = self.clone();
        for (amp, &n) in out.amplitudes.iter_mut().zip(&numbers) {
            *amp *= Complex64::from_polar(1.0, -x * n as f64);
        }
        out
    }

    pub fn projector(&self) -> FockOperator {
        FockOperator {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            cutoff: self.cutoff,
            modes: self.modes,
        }
    }
}

/// Non-zero Fock amplitudes `(n, c_n)` in the natural basis of each state
/// (`|n>` for single-mode states, `|n, n>` for the two-mode state).
fn amplitude_sequence(state: &ProbeState<f64>) -> Box<dyn Iterator<Item = (usize, f64)>> {
    let n_mean = state.mean_photon_number();
    match state.kind() {
        StateKind::Coherent => {
            let alpha = n_mean.sqrt();
            let mut c = (-n_mean / 2.0).exp();
            Box::new((0..).map(move |n| {
                if n > 0 {
                    c *= alpha / (n as f64).sqrt();
                }
                (n, c)
            }))
        }
        StateKind::SingleModeSqueezed => {
            let r = state.squeeze_parameter().unwrap_or(0.0);
            let t = r.tanh();
            let mut c = (1.0 / r.cosh()).sqrt();
            Box::new((0..).map(move |k: usize| {
                if k > 0 {
                    c *= t * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
                }
                (2 * k, c)
            }))
        }
        StateKind::TwoModeSqueezed => {
            let r = state.squeeze_parameter().unwrap_or(0.0);
            let t = -r.tanh();
            let mut c = 1.0 / r.cosh();
            Box::new((0..).map(move |n| {
                if n > 0 {
                    c *= t;
                }
                (n, c)
            }))
        }
    }
}

pub fn required_cutoff(state: &ProbeState<f64>) -> usize {
    required_cutoff_for(state, TAIL_TOLERANCE)
}

/// Smallest cutoff leaving at most `tail` probability mass outside.
pub fn required_cutoff_for(state: &ProbeState<f64>, tail: f64) -> usize {
    let mut mass = 0.0;
    for (n, c) in amplitude_sequence(state) {
        mass += c * c;
        if 1.0 - mass < tail || n >= MAX_CUTOFF_SEARCH {
            return n;
        }
    }
    MAX_CUTOFF_SEARCH
}

/// Fock expansion of a probe state, truncated at `cutoff` photons (per mode).
pub fn fock_state(state: &ProbeState<f64>, cutoff: usize) -> Result<FockVector> {
    if cutoff < 1 {
        return Err(QzzbError::domain("cutoff must be >= 1"));
    }
    let modes = match state.kind() {
        StateKind::TwoModeSqueezed => Modes::Two,
        _ => Modes::Single,
    };
    let mut amplitudes = DVector::from_element(modes.dim(cutoff), ZERO);
    let mut mass = 0.0;
    for (n, c) in amplitude_sequence(state) {
        if n > cutoff {
            break;
        }
        let idx = match modes {
            Modes::Single => n,
            Modes::Two => n * (cutoff + 1) + n,
        };
        amplitudes[idx] = Complex64::new(c, 0.0);
        mass += c * c;
    }
    let tail_mass = (1.0 - mass).max(0.0);
    if tail_mass > TAIL_TOLERANCE {
        return Err(QzzbError::Truncation {
            tail: tail_mass,
            cutoff,
            required: required_cutoff(state),
        });
    }
    let norm = amplitudes.norm();
    amplitudes.unscale_mut(norm);
    Ok(FockVector {
        amplitudes,
        cutoff,
        modes,
        tail_mass,
    })
}

/// Pure branches `Pi_l(x) |psi>` of the loss channel (with `lambda1 = 0`), one per `l`.
pub fn lossy_ensemble(state: &ProbeState<f64>, eta: f64, x: f64, cutoff: usize) -> Result<Vec<DVector<Complex64>>> {
    let psi = fock_state(state, cutoff)?;
    let d = cutoff + 1;
    let mut branches = Vec::with_capacity(d);
    for l in 0..=cutoff {
        let k = kraus_loss(l, eta, x, 0.0, cutoff)?.matrix;
        let v = match psi.modes {
            Modes::Single => &k * &psi.amplitudes,
            Modes::Two => {
                // rows index mode a, columns mode b
                let grid = DMatrix::from_row_slice(d, d, psi.amplitudes.as_slice());
                let out = &k * grid;
                DVector::from_iterator(d * d, out.transpose().iter().copied())
            }
        };
        if v.norm() > 0.0 {
            branches.push(v);
        }
    }
    Ok(branches)
}

/// State after phase encoding `x` followed by loss `eta` (on mode `a`).
pub fn lossy_state(state: &ProbeState<f64>, eta: f64, x: f64, cutoff: usize) -> Result<FockOperator> {
    let psi_modes = match state.kind() {
        StateKind::TwoModeSqueezed => Modes::Two,
        _ => Modes::Single,
    };
    let branches = lossy_ensemble(state, eta, x, cutoff)?;
    let dim = psi_modes.dim(cutoff);
    let mut rho = DMatrix::from_element(dim, dim, ZERO);
    for v in &branches {
        rho.gerc(Complex64::new(1.0, 0.0), v, v, Complex64::new(1.0, 0.0));
    }
    let populated: Vec<usize> = (0..dim).filter(|&i| branches.iter().any(|v| v[i] != ZERO)).collect();
    let op = FockOperator {
        matrix: rho,
        cutoff,
        modes: psi_modes,
    };
    check_density(&op, &populated)?;
    Ok(op)
}

/// Encoded state with off-diagonal damping `exp(-kappa^2 (m - n)^2)` in mode `a`.
pub fn dephased_state(state: &ProbeState<f64>, kappa: f64, x: f64, cutoff: usize) -> Result<FockOperator> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(QzzbError::domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let psi = fock_state(state, cutoff)?;
    let numbers = psi.mode_a_numbers();
    let dim = psi.amplitudes.len();
    let populated: Vec<usize> = (0..dim).filter(|&i| psi.amplitudes[i] != ZERO).collect();
    let mut rho = DMatrix::from_element(dim, dim, ZERO);
    for &i in &populated {
        let ai = psi.amplitudes[i];
        for &j in &populated {
            let aj = psi.amplitudes[j];
            let dm = numbers[i] as f64 - numbers[j] as f64;
            let factor = Complex64::from_polar((-kappa * kappa * dm * dm).exp(), -x * dm);
            rho[(i, j)] = ai * aj.conj() * factor;
        }
    }
    let op = FockOperator {
        matrix: rho,
        cutoff,
        modes: psi.modes,
    };
    check_density(&op, &populated)?;
    Ok(op)
}

/// Hermiticity and unit trace; positivity is checked where eigenvalues are computed.
/// `populated` lists the basis states that may carry weight; every other row and
/// column is exactly zero by construction.
fn check_density(op: &FockOperator, populated: &[usize]) -> Result<()> {
    let m = &op.matrix;
    let mut herm = 0.0_f64;
    for (k, &i) in populated.iter().enumerate() {
        for &j in &populated[k..] {
            herm = herm.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    if herm > 1e-12 {
        return Err(QzzbError::Numerical(format!("density matrix not Hermitian (residual {herm:.3e})")));
    }
    let tr: Complex64 = populated.iter().map(|&i| m[(i, i)]).sum();
    if (tr.re - 1.0).abs() > 10.0 * TAIL_TOLERANCE || tr.im.abs() > 1e-12 {
        return Err(QzzbError::Numerical(format!("density matrix trace {tr} is not 1")));
    }
    if populated.iter().any(|&i| m[(i, i)].re < -1e-12) {
        return Err(QzzbError::Numerical("density matrix has a negative population".into()));
    }
    Ok(())
}
