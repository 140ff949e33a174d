use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QzzbError, Result};
use crate::oracle::operators::FockOperator;
use crate::oracle::states::fock_state;
use crate::states::ProbeState;

/// Most negative eigenvalue accepted as round-off before the input is rejected.
const PSD_TOLERANCE: f64 = 1e-10;
/// Eigenvalues at or below this (relative to the largest) are treated as zero.
const RANK_CUTOFF: f64 = 1e-15;
/// Basis states whose population is below this in both inputs are dropped.
const SUPPORT_CUTOFF: f64 = 1e-30;

/// `sqrt(rho)` as a factor `A` with `rho = A A^dagger`, columns scaled eigenvectors.
///
/// Uses the SVD rather than `symmetric_eigen`, whose reconstruction error is
/// several orders of magnitude worse and leaks into the fidelity at ~1e-6.
fn psd_factor(rho: &DMatrix<Complex64>, label: &str) -> Result<DMatrix<Complex64>> {
    let svd = rho.clone().svd(true, false);
    let u = svd.u.ok_or_else(|| QzzbError::Numerical(format!("SVD of {label} failed")))?;
    let sigma = &svd.singular_values;
    let max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let mut cols = Vec::new();
    for i in 0..sigma.len() {
        let v = u.column(i);
        // for a Hermitian input the singular vector is an eigenvector; the
        // Rayleigh quotient recovers the sign of its eigenvalue
        let lambda = (v.adjoint() * rho * v)[(0, 0)].re;
        if lambda < -PSD_TOLERANCE {
            return Err(QzzbError::domain(format!(
                "{label} is not positive semidefinite (eigenvalue {lambda:.3e})"
            )));
        }
        if sigma[i] > RANK_CUTOFF * max && lambda > 0.0 {
            cols.push(v * Complex64::new(sigma[i].sqrt(), 0.0));
        }
    }
    if cols.is_empty() {
        return Ok(DMatrix::zeros(rho.nrows(), 1));
    }
    Ok(DMatrix::from_columns(&cols))
}

/// Sum of singular values.
fn nuclear_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`.
///
/// Evaluated as `||A1^dagger A2||_*^2` with `rho_k = A_k A_k^dagger` from Hermitian
/// eigendecompositions, which equals the trace form and avoids a second square
/// root. Basis states unpopulated in both inputs are projected out first; for a
/// positive semidefinite input their rows and columns vanish as well.
pub fn uhlmann_fidelity(rho1: &FockOperator, rho2: &FockOperator) -> Result<f64> {
    if rho1.dim() != rho2.dim() || rho1.cutoff != rho2.cutoff || rho1.modes != rho2.modes {
        return Err(QzzbError::domain("density matrices live on different truncated spaces"));
    }
    let support: Vec<usize> = (0..rho1.dim())
        .filter(|&i| rho1.matrix[(i, i)].re.abs() > SUPPORT_CUTOFF || rho2.matrix[(i, i)].re.abs() > SUPPORT_CUTOFF)
        .collect();
    if support.is_empty() {
        return Err(QzzbError::domain("density matrices are identically zero"));
    }
    let restrict = |rho: &FockOperator, label: &str| -> Result<DMatrix<Complex64>> {
        let m = rho.matrix.select_rows(&support).select_columns(&support);
        let herm = m
            .iter()
            .zip(m.adjoint().iter())
            .fold(0.0_f64, |worst, (a, b)| worst.max((a - b).norm()));
        if herm > 1e-10 {
            return Err(QzzbError::domain(format!("{label} is not Hermitian (residual {herm:.3e})")));
        }
        Ok(m)
    };
    let a1 = psd_factor(&restrict(rho1, "rho1")?, "rho1")?;
    let a2 = psd_factor(&restrict(rho2, "rho2")?, "rho2")?;
    let root = nuclear_norm(&(a1.adjoint() * a2));
    Ok((root * root).min(1.0))
}

/// Uhlmann fidelity of two ensembles given as unnormalized pure branches,
/// `rho_k = sum_i |v_i><v_i|`. Needs no eigendecomposition.
pub fn uhlmann_fidelity_factored(
    branches1: &[DVector<Complex64>],
    branches2: &[DVector<Complex64>],
) -> Result<f64> {
    if branches1.is_empty() || branches2.is_empty() {
        return Err(QzzbError::domain("empty ensemble"));
    }
    let dim = branches1[0].len();
    if branches1.iter().chain(branches2).any(|v| v.len() != dim) {
        return Err(QzzbError::domain("ensemble branches differ in dimension"));
    }
    let a1 = DMatrix::from_columns(branches1);
    let a2 = DMatrix::from_columns(branches2);
    let root = nuclear_norm(&(a1.adjoint() * a2));
    Ok((root * root).min(1.0))
}

/// Environment factor `<0| exp(i s p) |0>` from a truncated momentum operator.
fn vacuum_momentum_overlap(s: f64) -> Result<Complex64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Complex64>>> = OnceLock::new();
    if s == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("overlap cache poisoned").get(&s.to_bits()) {
        return Ok(*v);
    }
    // the truncated spectrum acts as a Gauss-Hermite rule; it resolves e^{isp}
    // once the basis size is well above s^2 / 2
    let dim = 64 + (s * s).ceil() as usize;
    if dim > 4000 {
        return Err(QzzbError::Numerical(format!(
            "environment displacement s = {s:.3} needs an oversized basis"
        )));
    }
    // p = (a - a^dagger) / (i sqrt 2) is diag(i^n) x diag(i^-n) conjugated, so it
    // shares its spectrum and |<0|v>|^2 weights with the real matrix below
    let mut x = DMatrix::<f64>::zeros(dim, dim);
    for n in 1..dim {
        let v = (n as f64 / 2.0).sqrt();
        x[(n - 1, n)] = v;
        x[(n, n - 1)] = v;
    }
    let eig = x.symmetric_eigen();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..dim {
        let w = eig.eigenvectors[(0, k)].powi(2);
        acc += Complex64::from_polar(w, s * eig.eigenvalues[k]);
    }
    cache.lock().expect("overlap cache poisoned").insert(s.to_bits(), acc);
    Ok(acc)
}

/// `|<Psi(x)|Psi(x + beta)>|^2` for the purification of the dephased state
/// with variational parameter `lambda2`: a Fock sum for the system factor and a
/// truncated-oscillator evaluation for the environment factor.
pub fn purified_overlap_diffusion(
    state: &ProbeState<f64>,
    kappa: f64,
    beta: f64,
    lambda2: f64,
    cutoff: usize,
) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(QzzbError::domain(format!("kappa must be > 0, got {kappa}")));
    }
    let psi = fock_state(state, cutoff)?;
    let numbers = psi.mode_a_numbers();
    let mut system = Complex64::new(0.0, 0.0);
    for (amp, &n) in psi.amplitudes.iter().zip(&numbers) {
        system += Complex64::from_polar(amp.norm_sqr(), beta * (lambda2 - 1.0) * n as f64);
    }
    let env = vacuum_momentum_overlap(beta * lambda2 / (2.0 * kappa))?;
    Ok((system * env).norm_sqr())
}
