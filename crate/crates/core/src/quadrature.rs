//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Integrands may return several components at once so that related integrals
//! (the tight and sine-relaxed bounds) share one set of fidelity evaluations.
//! Panels are bisected in order of largest error until every component meets
//! `max(abs_tol, rel_tol * |value|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{QzzbError, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-11,
            rel_tol: 1e-9,
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T, const K: usize> {
    pub value: [T; K],
    pub error: [T; K],
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel<T, const K: usize> {
    a: T,
    b: T,
    value: [T; K],
    error: [T; K],
    priority: f64,
}

impl<T, const K: usize> PartialEq for Panel<T, K> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<T, const K: usize> Eq for Panel<T, K> {}
impl<T, const K: usize> PartialOrd for Panel<T, K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T, const K: usize> Ord for Panel<T, K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod_panel<T, F, const K: usize>(f: &mut F, a: T, b: T) -> Result<([T; K], [T; K])>
where
    T: Scalar,
    F: FnMut(T) -> Result<[T; K]>,
{
    let half = (b - a) / T::lit(2.0);
    let centre = (a + b) / T::lit(2.0);
    let fc = f(centre)?;
    let mut kronrod = [T::zero(); K];
    let mut gauss = [T::zero(); K];
    for c in 0..K {
        kronrod[c] = fc[c] * T::lit(WGK[7]);
        gauss[c] = fc[c] * T::lit(WG[3]);
    }
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * T::lit(x);
        let lo = f(centre - dx)?;
        let hi = f(centre + dx)?;
        for c in 0..K {
            let s = lo[c] + hi[c];
            kronrod[c] = kronrod[c] + T::lit(WGK[j]) * s;
            if j % 2 == 1 {
                gauss[c] = gauss[c] + T::lit(WG[j / 2]) * s;
            }
        }
    }
    let mut value = [T::zero(); K];
    let mut error = [T::zero(); K];
    for c in 0..K {
        value[c] = kronrod[c] * half;
        error[c] = ((kronrod[c] - gauss[c]) * half).abs();
        if !value[c].is_finite() {
            return Err(QzzbError::Numerical(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
    }
    Ok((value, error))
}

fn satisfied<T: Scalar, const K: usize>(value: &[T; K], error: &[T; K], opts: &QuadratureOptions) -> bool {
    let abs_tol = T::tol(opts.abs_tol);
    let rel_tol = T::tol(opts.rel_tol);
    (0..K).all(|c| error[c] <= abs_tol.max(rel_tol * value[c].abs()))
}

/// Integrates a `K`-component integrand over `[a, b]`.
///
/// Returns the best estimate even when the panel budget runs out; check
/// [`Quadrature::converged`].
pub fn integrate_many<T, F, const K: usize>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadratureOptions,
) -> Result<Quadrature<T, K>>
where
    T: Scalar,
    F: FnMut(T) -> Result<[T; K]>,
{
    if !a.is_finite() || !b.is_finite() {
        return Err(QzzbError::domain("integration limits must be finite"));
    }
    if a == b {
        return Ok(Quadrature {
            value: [T::zero(); K],
            error: [T::zero(); K],
            evaluations: 0,
            converged: true,
        });
    }

    let priority = |err: &[T; K]| err.iter().fold(0.0_f64, |m, e| m.max(e.as_f64()));

    let (value, error) = kronrod_panel(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total_value = value;
    let mut total_error = error;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value,
        error,
        priority: priority(&error),
    });

    let mut converged = satisfied(&total_value, &total_error, opts);
    while !converged && heap.len() < opts.max_panels {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) / T::lit(2.0);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // panel no longer splittable at this precision
            heap.push(worst);
            break;
        }
        let (lv, le) = kronrod_panel(&mut f, worst.a, mid)?;
        let (rv, re) = kronrod_panel(&mut f, mid, worst.b)?;
        evaluations += 30;
        for c in 0..K {
            total_value[c] = total_value[c] - worst.value[c] + lv[c] + rv[c];
            total_error[c] = total_error[c] - worst.error[c] + le[c] + re[c];
        }
        heap.push(Panel { a: worst.a, b: mid, value: lv, error: le, priority: priority(&le) });
        heap.push(Panel { a: mid, b: worst.b, value: rv, error: re, priority: priority(&re) });
        converged = satisfied(&total_value, &total_error, opts);
    }

    // re-sum to shed the drift of the running totals
    let mut value = [T::zero(); K];
    let mut error = [T::zero(); K];
    for p in heap.iter() {
        for c in 0..K {
            value[c] = value[c] + p.value[c];
            error[c] = error[c] + p.error[c];
        }
    }
    Ok(Quadrature {
        converged: satisfied(&value, &error, opts),
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_many`].
pub fn integrate<T, F>(mut f: F, a: T, b: T, opts: &QuadratureOptions) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let q = integrate_many(|x| f(x).map(|v| [v]), a, b, opts)?;
    Ok((q.value[0], q.error[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let (v, e) = integrate(|x: f64| Ok(x.powi(5) - 3.0 * x * x + 1.0), -1.0, 2.0, &QuadratureOptions::default()).unwrap();
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        assert!(e < 1e-12);
    }

    #[test]
    fn sine_over_half_period() {
        let (v, _) = integrate(|x: f64| Ok((x / 2.0).sin()), 0.0, 2.0 * PI, &QuadratureOptions::default()).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_converges() {
        let q = integrate_many(
            |x: f64| Ok([(20.0 * (x.cos() - 1.0)).exp()]),
            0.0,
            2.0 * PI,
            &QuadratureOptions::default(),
        )
        .unwrap();
        // 2*pi*exp(-20)*I0(20)
        let exact = 2.0 * PI * 0.0897803118848260215959;
        assert!(q.converged);
        assert!((q.value[0] - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn kinked_integrand_converges() {
        let opts = QuadratureOptions { rel_tol: 1e-12, ..Default::default() };
        let q = integrate_many(|x: f64| Ok([(x - 1.0).abs(), x]), 0.0, 3.0, &opts).unwrap();
        assert!(q.converged);
        assert!((q.value[0] - 2.5).abs() < 1e-9);
        assert!((q.value[1] - 4.5).abs() < 1e-12);
    }

    #[test]
    fn reversed_and_empty_limits() {
        let opts = QuadratureOptions::default();
        let (v, _) = integrate(|x: f64| Ok(x), 1.0, 0.0, &opts).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        let (z, _) = integrate(|x: f64| Ok(x), 1.0, 1.0, &opts).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(|_x: f64| Err(QzzbError::Numerical("boom".into())), 0.0, 1.0, &QuadratureOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn f32_integration() {
        let (v, _) = integrate(|x: f32| Ok(x.cos()), 0.0, 1.0, &QuadratureOptions::default()).unwrap();
        assert!((v - 1.0_f32.sin()).abs() < 1e-6);
    }
}
