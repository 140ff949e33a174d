//! One-dimensional maximization: dense grid scan, then golden-section refinement
//! around the most promising grid maxima.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct MaximizeOptions {
    /// Number of grid points, endpoints included.
    pub grid_points: usize,
    /// Final bracket width of the golden-section search.
    pub x_tol: f64,
    /// How many distinct grid maxima are refined.
    pub candidates: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            grid_points: 257,
            x_tol: 1e-10,
            candidates: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub x: T,
    pub value: T,
}

/// Maximizes `f` on `[lo, hi]`.
pub fn maximize<T, F>(f: F, lo: T, hi: T, opts: &MaximizeOptions) -> Maximum<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let n = opts.grid_points.max(3);
    let step = (hi - lo) / T::lit((n - 1) as f64);
    let xs: Vec<T> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * T::lit(i as f64) })
        .collect();
    let ys: Vec<T> = xs.iter().map(|&x| f(x)).collect();

    // local maxima of the sampled profile, best first
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || ys[i] >= ys[i - 1];
            let right = i == n - 1 || ys[i] >= ys[i + 1];
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| ys[b].partial_cmp(&ys[a]).unwrap_or(std::cmp::Ordering::Equal));
    peaks.truncate(opts.candidates.max(1));

    let mut best = Maximum { x: xs[0], value: ys[0] };
    for i in 0..n {
        if ys[i] > best.value {
            best = Maximum { x: xs[i], value: ys[i] };
        }
    }
    for &i in &peaks {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let refined = golden_section(&f, a, b, T::tol(opts.x_tol));
        if refined.value > best.value {
            best = refined;
        }
    }
    best
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section<T, F>(f: &F, mut a: T, mut b: T, x_tol: T) -> Maximum<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a).abs() > x_tol && iterations < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let mut best = if fc >= fd {
        Maximum { x: c, value: fc }
    } else {
        Maximum { x: d, value: fd }
    };
    for x in [a, b] {
        let v = f(x);
        if v > best.value {
            best = Maximum { x, value: v };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        let m = maximize(|x: f64| -(x - 0.3).powi(2) + 2.0, -1.0, 1.0, &MaximizeOptions::default());
        // a quadratic peak only pins x to about sqrt(eps)
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn picks_global_of_two_peaks() {
        let f = |x: f64| (-(x + 2.0).powi(2) * 50.0).exp() * 0.9 + (-(x - 1.7).powi(2) * 50.0).exp();
        let m = maximize(f, -3.0, 3.0, &MaximizeOptions::default());
        assert!((m.x - 1.7).abs() < 1e-6);
    }

    #[test]
    fn boundary_maximum() {
        let m = maximize(|x: f64| x, 0.0, 1.0, &MaximizeOptions::default());
        assert_eq!(m.x, 1.0);
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn narrow_peak_on_grid_point() {
        // width far below the grid spacing, centred on the grid point 0
        let m = maximize(|x: f64| (-(x - 1e-4).powi(2) / 1e-8).exp(), -1.0, 1.0, &MaximizeOptions::default());
        assert!((m.x - 1e-4).abs() < 1e-8);
        assert!((m.value - 1.0).abs() < 1e-12);
    }
}
