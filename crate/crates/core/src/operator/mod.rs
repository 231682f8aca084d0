//! Finite-dimensional Hermitian operator algebra.
//!
//! States and observables are dense complex matrices. [`HermitianOperator`]
//! and [`DensityOperator`] are validated on construction and immutable
//! afterwards, so every downstream functional can assume its invariants.

mod exchange;
mod norms;
mod sampling;
mod spectral;

pub use exchange::{read_matrix, write_matrix, MatrixKind, MatrixRecord};
pub use norms::{frobenius_norm, scaled_schatten_norm, schatten_norm, singular_values, SchattenExponent};
pub use sampling::{
    gaussian_matrix, random_hermitian, random_unitary, sample_random_density, sample_random_pure,
    seeded_rng, substream_rng,
};
pub use spectral::{spectral_decompose, SpectralDecomposition};
pub(crate) use norms::lp_of;

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{abs2, cabs, cis, cr, CMatrix, Real};

/// Relative Hermiticity tolerance (w.r.t. the largest entry magnitude).
pub const TOL_HERM: f64 = 1e-12;
/// Eigenvalues down to `-TOL_PSD` are clipped to zero; below that a state is rejected.
pub const TOL_PSD: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const TOL_TRACE: f64 = 1e-12;

/// Largest entry of `|M - M*|`.
pub fn max_asymmetry<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = cabs(m[(i, j)] - m[(j, i)].conj());
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn max_entry<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

fn ensure_square<T: Real>(m: &CMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite_value() || !z.im.is_finite_value()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Self-adjoint matrix `K = K*`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    matrix: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates Hermiticity to [`TOL_HERM`] relative to the largest entry and
    /// stores the exactly symmetrized matrix.
    pub fn new(matrix: CMatrix<T>) -> Result<Self> {
        ensure_square(&matrix)?;
        let asym = max_asymmetry(&matrix);
        let tol = T::tol(TOL_HERM) * max_entry(&matrix);
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym.as_f64(), tolerance: tol.as_f64() });
        }
        Ok(Self::from_hermitian_part(matrix))
    }

    /// `(M + M*) / 2`, never fails.
    pub fn from_hermitian_part(matrix: CMatrix<T>) -> Self {
        let adj = matrix.adjoint();
        let half = cr(T::lit(0.5));
        Self { matrix: (matrix + adj) * half }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| cr(x)));
        Self { matrix: CMatrix::from_diagonal(&d) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn spectrum(&self) -> SpectralDecomposition<T> {
        SpectralDecomposition::of_hermitian(self)
    }

    /// `K + c·I`.
    pub fn shifted(&self, c: T) -> Self {
        let n = self.dim();
        Self { matrix: &self.matrix + CMatrix::identity(n, n) * cr(c) }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { matrix: &self.matrix * cr(c) }
    }

    /// `U K U*`.
    pub fn conjugated(&self, u: &CMatrix<T>) -> Self {
        Self::from_hermitian_part(u * &self.matrix * u.adjoint())
    }

    /// Applies a real function through the spectral calculus: `V f(Λ) V*`.
    pub fn apply_function(&self, f: impl Fn(T) -> T) -> Self {
        let s = self.spectrum();
        Self::from_hermitian_part(s.apply(|l| cr(f(l))))
    }

    /// `e^{i t K}`, unitary by construction.
    pub fn exp_i(&self, t: T) -> CMatrix<T> {
        self.spectrum().apply(|l| cis(t * l))
    }

    /// `√H` for positive semidefinite `H`; eigenvalues in `[-TOL_PSD, 0)` are clipped.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let s = self.spectrum();
        let min = s.min_eigenvalue();
        if min < -T::tol(TOL_PSD) {
            return Err(Error::NotPositive { min_eigenvalue: min.as_f64() });
        }
        Ok(Self::from_hermitian_part(s.apply(|l| cr(l.max(T::zero()).sqrt()))))
    }
}

/// Positive semidefinite operator with unit trace.
///
/// The spectral decomposition is computed once at construction; all the
/// information functionals work in the eigenbasis of the state.
#[derive(Clone, Debug)]
pub struct DensityOperator<T: Real> {
    base: HermitianOperator<T>,
    trace: T,
    spectrum: SpectralDecomposition<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(base: HermitianOperator<T>) -> Result<Self> {
        let trace = base.matrix.trace().re;
        if (trace - T::one()).abs() > T::tol(TOL_TRACE) {
            return Err(Error::InvalidTrace { trace: trace.as_f64() });
        }
        let spectrum = base.spectrum();
        let min = spectrum.min_eigenvalue();
        if min < -T::tol(TOL_PSD) {
            return Err(Error::NotPositive { min_eigenvalue: min.as_f64() });
        }
        Ok(Self { base, trace, spectrum })
    }

    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    /// Divides a positive semidefinite matrix by its trace.
    pub fn normalized(matrix: CMatrix<T>) -> Result<Self> {
        let h = HermitianOperator::new(matrix)?;
        let tr = h.matrix.trace().re;
        if !(tr > T::zero()) {
            return Err(Error::InvalidTrace { trace: tr.as_f64() });
        }
        Self::new(h.scaled(T::one() / tr))
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &DVector<Complex<T>>) -> Result<Self> {
        let norm2 = psi.iter().fold(T::zero(), |acc, z| acc + abs2(*z));
        if !(norm2 > T::zero()) {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let m = psi * psi.adjoint() * cr(T::one() / norm2);
        Self::new(HermitianOperator::from_hermitian_part(m))
    }

    pub fn from_diagonal(probabilities: &[T]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(probabilities))
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn trace(&self) -> T {
        self.trace
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.base.matrix
    }

    pub fn as_hermitian(&self) -> &HermitianOperator<T> {
        &self.base
    }

    pub fn spectrum(&self) -> &SpectralDecomposition<T> {
        &self.spectrum
    }

    /// Eigenvalues below the eigensolver resolution `4·n·ε·λ_max` count as
    /// zero; this covers the `[-TOL_PSD, 0)` clipping band and keeps
    /// round-off eigenvalues out of `√ρ`, where they would enter as `√ε`.
    pub fn zero_cutoff(&self) -> T {
        let lmax = self.spectrum.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b));
        T::lit(4.0) * T::count(self.dim()) * T::default_epsilon() * lmax
    }

    /// Eigenvalues with everything at or below [`Self::zero_cutoff`] set to zero.
    pub fn clipped_eigenvalues(&self) -> Vec<T> {
        let cut = self.zero_cutoff();
        self.spectrum.eigenvalues.iter().map(|&l| if l > cut { l } else { T::zero() }).collect()
    }

    /// `√ρ` via the cached spectrum.
    pub fn sqrt(&self) -> HermitianOperator<T> {
        let cut = self.zero_cutoff();
        HermitianOperator::from_hermitian_part(
            self.spectrum.apply(|l| cr(if l > cut { l.sqrt() } else { T::zero() })),
        )
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.clipped_eigenvalues().iter().fold(T::zero(), |acc, &l| acc + l * l)
    }

    /// Numerical rank: eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: T) -> usize {
        self.spectrum.eigenvalues.iter().filter(|&&l| l > cutoff).count()
    }

    /// `U ρ U*`.
    pub fn conjugated(&self, u: &CMatrix<T>) -> Result<Self> {
        Self::new(self.base.conjugated(u))
    }
}

/// `√ρ`, the square root entering the skew information.
pub fn matrix_sqrt_psd<T: Real>(rho: &DensityOperator<T>) -> HermitianOperator<T> {
    rho.sqrt()
}

/// `AB − BA`.
pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(a * b - b * a)
}

/// `Tr(A B)` without forming the product.
pub fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.nrows();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Pauli matrices, used throughout the tests and the worked examples.
pub mod pauli {
    use crate::scalar::{c, CMatrix, Real};

    pub fn x<T: Real>() -> CMatrix<T> {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn y<T: Real>() -> CMatrix<T> {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    pub fn z<T: Real>() -> CMatrix<T> {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn close(a: &CMatrix<f64>, b: &CMatrix<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rejects_non_hermitian_with_asymmetry() {
        let m = CMatrix::<f64>::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { asymmetry, .. }) => assert!((asymmetry - 2.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn density_rejects_bad_trace_and_negative_eigenvalue() {
        assert!(matches!(DensityOperator::<f64>::from_diagonal(&[0.5, 0.4]), Err(Error::InvalidTrace { .. })));
        assert!(matches!(
            DensityOperator::<f64>::from_diagonal(&[1.1, -0.1]),
            Err(Error::NotPositive { .. })
        ));
        // Tiny negative eigenvalues inside the clipping band are accepted.
        let rho = DensityOperator::<f64>::from_diagonal(&[1.0 + 5e-11, -5e-11]).unwrap();
        assert_eq!(rho.clipped_eigenvalues(), vec![1.0 + 5e-11, 0.0]);
        let rho = DensityOperator::<f64>::from_diagonal(&[1.0 - 1e-17, 1e-17]).unwrap();
        assert_eq!(rho.clipped_eigenvalues(), vec![1.0 - 1e-17, 0.0]);
    }

    #[test]
    fn sqrt_of_diagonal_state() {
        let rho = DensityOperator::<f64>::from_diagonal(&[0.75, 0.25]).unwrap();
        let s = matrix_sqrt_psd(&rho);
        let expected = CMatrix::from_row_slice(2, 2, &[c(3f64.sqrt() / 2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(close(s.matrix(), &expected, 1e-15));
    }

    #[test]
    fn sqrt_of_pure_state_is_itself() {
        let psi = DVector::from_vec(vec![c::<f64>(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]);
        let rho = DensityOperator::pure(&psi).unwrap();
        let s = rho.sqrt();
        assert!(close(s.matrix(), rho.matrix(), 1e-12));
    }

    #[test]
    fn sqrt_psd_rejects_indefinite() {
        let h = HermitianOperator::<f64>::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(h.sqrt_psd(), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn commutator_examples() {
        let d1 = HermitianOperator::<f64>::from_real_diagonal(&[1.0, 2.0]);
        let d2 = HermitianOperator::<f64>::from_real_diagonal(&[-3.0, 0.5]);
        assert_eq!(commutator(d1.matrix(), d2.matrix()).unwrap().norm(), 0.0);

        let xy = commutator(&pauli::x::<f64>(), &pauli::y()).unwrap();
        assert!(close(&xy, &(pauli::z::<f64>() * c(0.0, 2.0)), 1e-15));

        let bad = CMatrix::<f64>::zeros(3, 3);
        assert!(matches!(commutator(&pauli::x::<f64>(), &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn commutator_of_hermitians_is_anti_hermitian() {
        let mut rng = seeded_rng(3);
        let a = random_hermitian::<f64, _>(5, &mut rng);
        let b = random_hermitian::<f64, _>(5, &mut rng);
        let k = commutator(a.matrix(), b.matrix()).unwrap();
        assert!((&k + k.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn exp_i_is_unitary() {
        let mut rng = seeded_rng(5);
        let h = random_hermitian::<f64, _>(6, &mut rng);
        let u = h.exp_i(0.7);
        assert!((&u * u.adjoint() - CMatrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let rho = DensityOperator::<f32>::from_diagonal(&[0.75, 0.25]).unwrap();
        let s = rho.sqrt();
        assert!((s.matrix()[(0, 0)].re - 0.866_025_4).abs() < 1e-6);
    }
}
