use std::cmp::Ordering;

use nalgebra::DVector;
use num_complex::Complex;

use super::{max_entry, HermitianOperator, TOL_HERM};
use crate::error::{Error, Result};
use crate::scalar::{abs2, cabs, cr, CMatrix, Real};

/// Components smaller than this (in a unit eigenvector) never fix the phase.
const PHASE_FIX_THRESHOLD: f64 = 1e-8;

/// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
///
/// Each eigenvector is phase-fixed so its first component above
/// `1e-8` in magnitude is real and positive; exact eigenvalue ties are
/// ordered lexicographically on the phase-fixed vectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: CMatrix<T>,
}

/// Decomposes `m`, rejecting non-Hermitian input with the measured asymmetry.
pub fn spectral_decompose<T: Real>(m: &CMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let h = HermitianOperator::new(m.clone()).map_err(|e| match e {
        Error::NotHermitian { asymmetry, .. } => Error::NotHermitian {
            asymmetry,
            tolerance: (T::tol(TOL_HERM) * max_entry(m)).as_f64(),
        },
        other => other,
    })?;
    Ok(SpectralDecomposition::of_hermitian(&h))
}

fn phase_fix<T: Real>(v: &mut [Complex<T>]) {
    let threshold = T::lit(PHASE_FIX_THRESHOLD);
    if let Some(lead) = v.iter().find(|z| cabs(**z) > threshold).copied() {
        let phase = lead.conj() / cr(cabs(lead));
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lexicographic<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x
            .re
            .partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn all_finite<T: Real>(values: &DVector<T>, vectors: &CMatrix<T>) -> bool {
    values.iter().all(|v| v.is_finite_value()) && vectors.iter().all(|z| z.re.is_finite_value() && z.im.is_finite_value())
}

/// Unsorted eigenpairs. nalgebra's implicit QR occasionally returns NaN on
/// very sparse low-rank input; a shifted retry and then cyclic Jacobi cover that.
fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (DVector<T>, CMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    if all_finite(&eig.eigenvalues, &eig.eigenvectors) {
        return (eig.eigenvalues, eig.eigenvectors);
    }
    let shift = m.norm().max(T::one());
    let shifted = m + CMatrix::<T>::identity(m.nrows(), m.ncols()) * cr(shift);
    let eig = shifted.symmetric_eigen();
    if all_finite(&eig.eigenvalues, &eig.eigenvectors) {
        return (eig.eigenvalues.map(|l| l - shift), eig.eigenvectors);
    }
    jacobi_eigen(m)
}

/// Cyclic complex Jacobi: each step removes the phase of `a_pq` and applies a real rotation.
pub(crate) fn jacobi_eigen<T: Real>(m: &CMatrix<T>) -> (DVector<T>, CMatrix<T>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = CMatrix::<T>::identity(n, n);
    let scale = m.norm();
    let target = T::default_epsilon() * scale;
    for _ in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += abs2(a[(p, q)]);
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = cabs(a[(p, q)]);
                if b <= T::default_epsilon() * T::lit(1e-3) * scale {
                    continue;
                }
                let dq = a[(p, q)].conj() / cr(b);
                for k in 0..n {
                    a[(k, q)] *= dq;
                    v[(k, q)] *= dq;
                }
                for k in 0..n {
                    a[(q, k)] *= dq.conj();
                }
                let tau = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * b);
                let t = if tau >= T::zero() { T::one() } else { -T::one() } / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * c - y * s;
                    a[(k, q)] = x * s + y * c;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * c - y * s;
                    v[(k, q)] = x * s + y * c;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = x * c - y * s;
                    a[(q, k)] = x * s + y * c;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
            }
        }
    }
    (DVector::from_iterator(n, (0..n).map(|i| a[(i, i)].re)), v)
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn of_hermitian(h: &HermitianOperator<T>) -> Self {
        let n = h.dim();
        let (values, vectors) = hermitian_eigen(h.matrix());
        let mut columns: Vec<(T, Vec<Complex<T>>)> = (0..n)
            .map(|j| {
                let mut v: Vec<Complex<T>> = vectors.column(j).iter().copied().collect();
                phase_fix(&mut v);
                (values[j], v)
            })
            .collect();
        columns.sort_by(|(la, va), (lb, vb)| {
            lb.partial_cmp(la).unwrap_or(Ordering::Equal).then_with(|| lexicographic(va, vb))
        });
        let eigenvalues = DVector::from_iterator(n, columns.iter().map(|(l, _)| *l));
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| columns[j].1[i]);
        Self { eigenvalues, eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.iter().copied().fold(T::infinity(), |a, b| a.min(b))
    }

    /// `V diag(f(λ)) V*`.
    pub fn apply(&self, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.apply(cr)
    }

    /// Matrix elements `⟨ψ_j|K ψ_k⟩` in the eigenbasis.
    pub fn in_eigenbasis(&self, k: &CMatrix<T>) -> CMatrix<T> {
        self.eigenvectors.adjoint() * k * &self.eigenvectors
    }

    /// Back from eigenbasis coordinates to the original basis.
    pub fn from_eigenbasis(&self, m: &CMatrix<T>) -> CMatrix<T> {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }
}
