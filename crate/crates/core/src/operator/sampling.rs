//! Seeded random ensembles.
//!
//! Generator: ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64(seed)`).
//! Complex Gaussian entries are drawn row-major as two consecutive
//! `StandardNormal` `f64` samples (real part first) scaled by `1/√2`, so
//! `E|z|² = 1`. Parallel work units use `set_stream(unit_index)` on the
//! same seed.

use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{DensityOperator, HermitianOperator};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cr, CMatrix, Real};

pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent substream for work unit `index` of a seeded run.
pub fn substream_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(re * s), T::lit(im * s))
}

/// `rows × cols` matrix of independent standard complex Gaussians, row-major draw order.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// `(G + G*)/2` for a Gaussian `G` (GUE up to scale).
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T> {
    HermitianOperator::from_hermitian_part(gaussian_matrix(dim, dim, rng))
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `diag(R)` removed.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix<T> {
    let g: CMatrix<T> = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = cabs(d);
        if n > T::zero() {
            let phase = d / cr(n);
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

/// Induced-measure state `G G* / Tr(G G*)` with `G` a `dim × rank` Gaussian matrix.
pub fn sample_random_density<T: Real>(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator<T>> {
    let mut rng = seeded_rng(seed);
    random_density_with(dim, rank, &mut rng)
}

pub(crate) fn random_density_with<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator<T>> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let g: CMatrix<T> = gaussian_matrix(dim, rank, rng);
    DensityOperator::normalized(&g * g.adjoint())
}

/// Haar-random pure state.
pub fn sample_random_pure<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityOperator<T>> {
    let v: CMatrix<T> = gaussian_matrix(dim, 1, rng);
    DensityOperator::pure(&DVector::from_iterator(dim, v.iter().copied()))
}
