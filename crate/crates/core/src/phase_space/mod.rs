//! Truncated position/momentum realizations, quantum gradients and the
//! discrete Wigner/Weyl pair.
//!
//! The single backend is the harmonic-oscillator (Hermite) basis, truncated
//! to `N` levels per axis, with `x = √(ħ/2)(a + a†)` and
//! `p = i√(ħ/2)(a† − a)`. Axis `0` is the most significant tensor factor.

mod gradient;
mod hermite;
pub mod states;
mod wigner;

pub use gradient::{gradient_magnitude_norm, iterated_gradient_norm, quantum_gradient, QuantumGradient, MAX_GRADIENT_ORDER};
pub use hermite::hermite_functions;
pub use wigner::{spectral_derivative, weyl_quantize, wigner_transform, GridMetadata, WignerField, WignerGrid};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, SpectralDecomposition};
use crate::scalar::{abs2, CMatrix, Real};

/// Default cap on the total basis size `N^d`.
pub const DEFAULT_MEMORY_CAP: usize = 4096;
/// Edge mass above which truncated checks abort.
pub const EDGE_MASS_THRESHOLD: f64 = 1e-8;

/// Truncated phase-space operators for `d` degrees of freedom.
#[derive(Clone, Debug)]
pub struct PhaseSpaceRep<T: Real> {
    d: usize,
    n: usize,
    hbar: T,
    x_ops: Vec<HermitianOperator<T>>,
    p_ops: Vec<HermitianOperator<T>>,
    x_spectra: Vec<OnceLock<SpectralDecomposition<T>>>,
}

/// Builds the harmonic representation with the default memory cap.
pub fn build_harmonic_rep<T: Real>(d: usize, n: usize, hbar: T) -> Result<PhaseSpaceRep<T>> {
    PhaseSpaceRep::harmonic(d, n, hbar, DEFAULT_MEMORY_CAP)
}

fn ladder_x<T: Real>(n: usize, hbar: T) -> CMatrix<T> {
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let v = (hbar * T::count(k + 1) / T::lit(2.0)).sqrt();
        m[(k, k + 1)].re = v;
        m[(k + 1, k)].re = v;
    }
    m
}

fn ladder_p<T: Real>(n: usize, hbar: T) -> CMatrix<T> {
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let v = (hbar * T::count(k + 1) / T::lit(2.0)).sqrt();
        m[(k + 1, k)].im = v;
        m[(k, k + 1)].im = -v;
    }
    m
}

/// `I_{N^axis} ⊗ m ⊗ I_{N^{d-1-axis}}`.
pub(crate) fn embed_axis<T: Real>(m: &CMatrix<T>, axis: usize, d: usize) -> CMatrix<T> {
    let n = m.nrows();
    let left = n.pow(axis as u32);
    let right = n.pow((d - 1 - axis) as u32);
    let l = CMatrix::<T>::identity(left, left);
    let r = CMatrix::<T>::identity(right, right);
    l.kronecker(m).kronecker(&r)
}

impl<T: Real> PhaseSpaceRep<T> {
    pub fn harmonic(d: usize, n: usize, hbar: T, memory_cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension d must be >= 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidArgument("basis size N must be >= 2".into()));
        }
        if !(hbar > T::zero()) {
            return Err(Error::InvalidArgument("hbar must be positive".into()));
        }
        let total = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if total > memory_cap as u128 {
            return Err(Error::MemoryCap { size: total.min(usize::MAX as u128) as usize, cap: memory_cap });
        }
        let x1 = ladder_x(n, hbar);
        let p1 = ladder_p(n, hbar);
        let x_ops = (0..d).map(|a| HermitianOperator::from_hermitian_part(embed_axis(&x1, a, d))).collect();
        let p_ops = (0..d).map(|a| HermitianOperator::from_hermitian_part(embed_axis(&p1, a, d))).collect();
        Ok(Self { d, n, hbar, x_ops, p_ops, x_spectra: (0..d).map(|_| OnceLock::new()).collect() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Basis size per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total Hilbert-space dimension `N^d`.
    pub fn dim(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    /// Planck constant `h = 2πħ` used by the scaled norms.
    pub fn planck(&self) -> T {
        T::two_pi() * self.hbar
    }

    pub fn x_ops(&self) -> &[HermitianOperator<T>] {
        &self.x_ops
    }

    pub fn p_ops(&self) -> &[HermitianOperator<T>] {
        &self.p_ops
    }

    pub fn x(&self, axis: usize) -> &HermitianOperator<T> {
        &self.x_ops[axis]
    }

    pub fn p(&self, axis: usize) -> &HermitianOperator<T> {
        &self.p_ops[axis]
    }

    /// Cached eigendecomposition of `x_axis`.
    pub fn x_spectrum(&self, axis: usize) -> &SpectralDecomposition<T> {
        self.x_spectra[axis].get_or_init(|| self.x_ops[axis].spectrum())
    }

    /// `e^{iξ x_axis}` through the spectral calculus of the truncated `x`.
    pub fn exp_i_x(&self, axis: usize, xi: T) -> CMatrix<T> {
        self.x_spectrum(axis).apply(|l| crate::scalar::cis(xi * l))
    }

    /// Spectral radius of the truncated `x` (largest Hermite root scaled by `√ħ`).
    pub fn x_spectral_radius(&self) -> T {
        let s = self.x_spectrum(0);
        s.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    pub fn check_dim(&self, m: &CMatrix<T>) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: m.nrows() });
        }
        Ok(())
    }

    fn on_top_level(&self, index: usize) -> bool {
        let mut i = index;
        for _ in 0..self.d {
            if i % self.n == self.n - 1 {
                return true;
            }
            i /= self.n;
        }
        false
    }

    /// `Σ |A_jk|²` over entries whose row or column touches the highest
    /// retained level of any axis.
    pub fn edge_mass(&self, a: &CMatrix<T>) -> T {
        let dim = self.dim();
        let top: Vec<bool> = (0..dim).map(|i| self.on_top_level(i)).collect();
        let mut acc = T::zero();
        for j in 0..dim {
            for k in 0..dim {
                if top[j] || top[k] {
                    acc += abs2(a[(j, k)]);
                }
            }
        }
        acc
    }

    /// Fails with [`Error::Truncation`] when the edge mass exceeds `threshold`.
    pub fn check_truncation(&self, a: &CMatrix<T>, threshold: f64) -> Result<T> {
        let mass = self.edge_mass(a);
        if mass > T::lit(threshold) {
            return Err(Error::Truncation { edge_mass: mass.as_f64(), threshold });
        }
        Ok(mass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::commutator;
    use crate::scalar::c;

    #[test]
    fn two_level_position() {
        let rep = build_harmonic_rep::<f64>(1, 2, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)]);
        assert!((rep.x(0).matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn canonical_commutator_with_corner() {
        let n = 8;
        let hbar = 0.7;
        let rep = build_harmonic_rep::<f64>(1, n, hbar).unwrap();
        let k = commutator(rep.x(0).matrix(), rep.p(0).matrix()).unwrap();
        let mut expected = CMatrix::<f64>::identity(n, n) * c(0.0, hbar);
        expected[(n - 1, n - 1)] = c(0.0, hbar * (1.0 - n as f64));
        assert!((k - expected).norm() < 1e-13);
    }

    #[test]
    fn tensor_axes_commute() {
        let rep = build_harmonic_rep::<f64>(2, 4, 0.5).unwrap();
        assert_eq!(rep.dim(), 16);
        let k = commutator(rep.x(0).matrix(), rep.x(1).matrix()).unwrap();
        assert_eq!(k.norm(), 0.0);
        let k = commutator(rep.x(0).matrix(), rep.p(1).matrix()).unwrap();
        assert_eq!(k.norm(), 0.0);
    }

    #[test]
    fn construction_errors() {
        assert!(build_harmonic_rep::<f64>(1, 1, 1.0).is_err());
        assert!(build_harmonic_rep::<f64>(1, 4, 0.0).is_err());
        assert!(matches!(build_harmonic_rep::<f64>(3, 32, 1.0), Err(Error::MemoryCap { .. })));
    }

    #[test]
    fn edge_mass_counts_top_level() {
        let rep = build_harmonic_rep::<f64>(1, 4, 1.0).unwrap();
        let mut a = CMatrix::<f64>::zeros(4, 4);
        a[(0, 0)] = c(1.0, 0.0);
        assert_eq!(rep.edge_mass(&a), 0.0);
        a[(3, 1)] = c(0.0, 2.0);
        a[(3, 3)] = c(1.0, 0.0);
        assert_eq!(rep.edge_mass(&a), 5.0);
        assert!(rep.check_truncation(&a, 1e-8).is_err());

        let rep2 = build_harmonic_rep::<f64>(2, 3, 1.0).unwrap();
        let mut b = CMatrix::<f64>::zeros(9, 9);
        b[(1, 1)] = c(1.0, 0.0); // levels (0,1)
        assert_eq!(rep2.edge_mass(&b), 0.0);
        b[(2, 0)] = c(1.0, 0.0); // levels (0,2): top on axis 1
        assert_eq!(rep2.edge_mass(&b), 1.0);
    }

    #[test]
    fn exponential_of_position_is_unitary() {
        let rep = build_harmonic_rep::<f64>(1, 12, 1.0).unwrap();
        let u = rep.exp_i_x(0, 0.3);
        assert!((&u * u.adjoint() - CMatrix::identity(12, 12)).norm() < 1e-12);
    }
}
