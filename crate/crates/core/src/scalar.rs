//! Scalar abstraction shared by the analytic parts of the crate.
//!
//! Everything outside the Fock-space oracle is written against [`Scalar`] so the
//! same code runs in `f32` and `f64`. Tolerances are expressed through
//! [`Scalar::tol`], which never goes below a small multiple of machine epsilon.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every value used with this is representable (up to rounding).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// `requested` clamped from below to `64 * epsilon`.
    #[inline]
    fn tol(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        Self::lit(requested).max(floor)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `sin(pi * t)` for `t` in `[0, 1]`, exactly zero at both ends.
#[inline]
pub(crate) fn sin_pi<T: Scalar>(t: T) -> T {
    let folded = t.min(T::one() - t);
    if folded <= T::zero() {
        return T::zero();
    }
    (T::PI() * folded).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_vanishes_at_both_ends() {
        assert_eq!(sin_pi(0.0_f64), 0.0);
        assert_eq!(sin_pi(1.0_f64), 0.0);
        assert!((sin_pi(0.5_f64) - 1.0).abs() < 1e-15);
        assert!((sin_pi(0.25_f64) - sin_pi(0.75_f64)).abs() < 1e-15);
    }

    #[test]
    fn tol_respects_epsilon_floor() {
        assert_eq!(<f64 as Scalar>::tol(1e-9), 1e-9);
        assert!(<f32 as Scalar>::tol(1e-9) > 1e-6);
    }
}
