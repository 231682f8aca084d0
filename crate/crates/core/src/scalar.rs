//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All matrix algebra is generic over a real type `T` with complex entries
//! `Complex<T>`. Tolerances are written once for `f64` and rescaled to the
//! precision of the chosen type through [`Real::tol`].

use std::fmt::{Debug, LowerExp};
use std::str::FromStr;

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;
use rustfft::FftPlanner;

/// Dense complex matrix over the real scalar `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Real scalar usable by the laboratory: `f64` for production runs, `f32`
/// for cheap smoke runs.
pub trait Real: RealField + Copy + ToPrimitive + LowerExp + FromStr + Default + Debug {
    /// Machine epsilon of `Self` divided by the `f64` machine epsilon.
    const EPSILON_RATIO: f64;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion back to `f64` for reports and error payloads.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Rescales a tolerance calibrated for `f64` to this precision.
    fn tol(x: f64) -> Self {
        Self::lit((x * Self::EPSILON_RATIO).min(0.5))
    }

    /// Converts a count or index.
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn infinity() -> Self;

    fn is_finite_value(self) -> bool;
}

impl Real for f64 {
    const EPSILON_RATIO: f64 = 1.0;

    fn infinity() -> Self {
        f64::INFINITY
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Real for f32 {
    const EPSILON_RATIO: f64 = (f32::EPSILON as f64) / f64::EPSILON;

    fn infinity() -> Self {
        f32::INFINITY
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

/// Unnormalized in-place DFT, forward (`e^{-2πi jk/n}`) or inverse.
pub fn fft_in_place<T: Real>(buf: &mut [Complex<T>], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    abs2(z).sqrt()
}

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `|z|²` without the square root.
#[inline]
pub(crate) fn abs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_rescale_with_precision() {
        assert_eq!(<f64 as Real>::tol(1e-12), 1e-12);
        let t32 = <f32 as Real>::tol(1e-12);
        assert!(t32 > 1e-5 && t32 < 1e-3);
    }

    #[test]
    fn fft_round_trip() {
        let mut v: Vec<Complex<f64>> = (0..8).map(|k| c(k as f64, -(k as f64) * 0.5)).collect();
        let orig = v.clone();
        fft_in_place(&mut v, false);
        fft_in_place(&mut v, true);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 8.0 - b).norm() < 1e-12);
        }
    }
}
