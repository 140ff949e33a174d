use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QzzbError, Result};
use crate::oracle::states::Modes;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: DMatrix<Complex64>,
    pub cutoff: usize,
    pub modes: Modes,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.matrix.adjoint();
        self.matrix
            .iter()
            .zip(adj.iter())
            .fold(0.0_f64, |worst, (a, b)| worst.max((a - b).norm()))
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DMatrix<Complex64>) -> f64 {
        self.matrix
            .iter()
            .zip(other.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Photon number of mode `a` for each basis index.
    pub fn mode_a_numbers(&self) -> Vec<usize> {
        self.modes.mode_a_numbers(self.cutoff)
    }
}

/// Truncated annihilation operator, `<n-1| a |n> = sqrt(n)`.
pub fn annihilation(cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let mut a = DMatrix::from_element(d, d, ZERO);
    for n in 1..d {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number_operator(cutoff: usize) -> DMatrix<Complex64> {
    let a = annihilation(cutoff);
    a.adjoint() * a
}

fn log_factorial(l: usize) -> f64 {
    (1..=l).map(|k| (k as f64).ln()).sum()
}

/// Loss Kraus operator `sqrt((1-eta)^l / l!) e^{-i beta (n - lambda1 l)} eta^{n/2} a^l`.
pub fn kraus_loss(l: usize, eta: f64, beta: f64, lambda1: f64, cutoff: usize) -> Result<FockOperator> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(QzzbError::domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    if l > cutoff {
        return Err(QzzbError::domain(format!("Kraus index {l} exceeds cutoff {cutoff}")));
    }
    let prefactor = if l == 0 {
        1.0
    } else if eta == 1.0 {
        0.0
    } else {
        (0.5 * (l as f64 * (1.0 - eta).ln() - log_factorial(l))).exp()
    };
    // a^l only links |n> to |n - l>, so the product is a shifted diagonal
    let d = cutoff + 1;
    let mut matrix = DMatrix::from_element(d, d, ZERO);
    for n in l..d {
        let m = n - l;
        let ladder = (0.5 * (log_factorial(n) - log_factorial(m))).exp();
        let phase = Complex64::from_polar(1.0, -beta * (m as f64 - lambda1 * l as f64));
        matrix[(m, n)] = phase * (prefactor * eta.powf(m as f64 / 2.0) * ladder);
    }
    Ok(FockOperator {
        matrix,
        cutoff,
        modes: Modes::Single,
    })
}

/// `out += a^dagger b`, skipping zero entries (Kraus operators are very sparse).
fn accumulate_adjoint_product(out: &mut DMatrix<Complex64>, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) {
    let mut rows_a: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); a.nrows()];
    for ((m, i), v) in a.iter().enumerate().map(|(k, v)| ((k % a.nrows(), k / a.nrows()), v)) {
        if *v != ZERO {
            rows_a[m].push((i, v.conj()));
        }
    }
    for j in 0..b.ncols() {
        for m in 0..b.nrows() {
            let bv = b[(m, j)];
            if bv == ZERO {
                continue;
            }
            for &(i, av) in &rows_a[m] {
                out[(i, j)] += av * bv;
            }
        }
    }
}

/// `Z = sum_l Pi_l^dagger(x) Pi_l(x + beta)`, summed over every `l <= cutoff`
/// (higher `l` annihilate the truncated space). Independent of `x`.
pub fn z_operator(eta: f64, beta: f64, lambda1: f64, cutoff: usize) -> Result<FockOperator> {
    let d = cutoff + 1;
    let mut z = DMatrix::from_element(d, d, ZERO);
    for l in 0..=cutoff {
        let at_x = kraus_loss(l, eta, 0.0, lambda1, cutoff)?;
        let shifted = kraus_loss(l, eta, beta, lambda1, cutoff)?;
        accumulate_adjoint_product(&mut z, &at_x.matrix, &shifted.matrix);
    }
    Ok(FockOperator {
        matrix: z,
        cutoff,
        modes: Modes::Single,
    })
}

/// Normal-ordered exponential `:exp(c a^dagger a): = sum_k c^k a^{dagger k} a^k / k!`,
/// summed to `k = cutoff`.
pub fn normal_ordered_exponential(c: Complex64, cutoff: usize) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let a = annihilation(cutoff);
    let ad = a.adjoint();
    let mut total = DMatrix::<Complex64>::identity(d, d);
    let mut a_pow = DMatrix::<Complex64>::identity(d, d);
    let mut ad_pow = DMatrix::<Complex64>::identity(d, d);
    let mut coeff = Complex64::new(1.0, 0.0);
    for k in 1..=cutoff {
        a_pow = &a_pow * &a;
        ad_pow = &ad_pow * &ad;
        coeff = coeff * c / k as f64;
        total += (&ad_pow * &a_pow) * coeff;
    }
    total
}
