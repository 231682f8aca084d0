//! Named state families on a harmonic representation.

use nalgebra::DVector;
use num_complex::Complex;

use super::PhaseSpaceRep;
use crate::error::{Error, Result};
use crate::operator::{gaussian_matrix, seeded_rng, DensityOperator};
use crate::scalar::{cr, CMatrix, Real};

fn require_1d<T: Real>(rep: &PhaseSpaceRep<T>) -> Result<()> {
    if rep.d() != 1 {
        return Err(Error::InvalidArgument(format!("family needs d = 1, rep has d = {}", rep.d())));
    }
    Ok(())
}

fn pure_from_amplitudes<T: Real>(amps: Vec<Complex<T>>) -> Result<DensityOperator<T>> {
    DensityOperator::pure(&DVector::from_vec(amps))
}

/// Number state `|k⟩` (d = 1).
pub fn fock<T: Real>(rep: &PhaseSpaceRep<T>, k: usize) -> Result<DensityOperator<T>> {
    require_1d(rep)?;
    if k >= rep.n() {
        return Err(Error::InvalidArgument(format!("level {k} outside truncation {}", rep.n())));
    }
    let mut amps = vec![cr(T::zero()); rep.n()];
    amps[k] = cr(T::one());
    pure_from_amplitudes(amps)
}

/// Product ground state `|0…0⟩`, any d.
pub fn ground<T: Real>(rep: &PhaseSpaceRep<T>) -> Result<DensityOperator<T>> {
    let mut amps = vec![cr(T::zero()); rep.dim()];
    amps[0] = cr(T::one());
    pure_from_amplitudes(amps)
}

/// Squeezed vacuum `S(r)|0⟩` with `σ_x² = (ħ/2) e^{−2r}` (d = 1), renormalized
/// after truncation.
pub fn squeezed<T: Real>(rep: &PhaseSpaceRep<T>, r: T) -> Result<DensityOperator<T>> {
    require_1d(rep)?;
    let squeezed = squeezed_amplitudes(rep.n(), r);
    pure_from_amplitudes(squeezed.into_iter().map(cr).collect())
}

pub(crate) fn squeezed_amplitudes<T: Real>(n: usize, r: T) -> Vec<T> {
    let t = r.tanh();
    let mut amps = vec![T::zero(); n];
    let mut c = T::one() / r.cosh().sqrt();
    let mut k = 0usize;
    while 2 * k < n {
        amps[2 * k] = c;
        let kf = T::count(k);
        // c_{2k+2} = c_{2k} · (−tanh r) · √((2k+1)(2k+2)) / (2(k+1))
        c = c * (-t) * ((T::lit(2.0) * kf + T::one()) * (T::lit(2.0) * kf + T::lit(2.0))).sqrt()
            / (T::lit(2.0) * (kf + T::one()));
        k += 1;
    }
    amps
}

/// Coherent state `|α⟩` (d = 1), renormalized after truncation.
pub fn coherent<T: Real>(rep: &PhaseSpaceRep<T>, alpha: Complex<T>) -> Result<DensityOperator<T>> {
    require_1d(rep)?;
    let mut amps = Vec::with_capacity(rep.n());
    let mut c = cr(T::one());
    for k in 0..rep.n() {
        amps.push(c);
        c = c * alpha / cr(T::count(k + 1).sqrt());
    }
    pure_from_amplitudes(amps)
}

/// Thermal state `∝ Σ q^k |k⟩⟨k|` (d = 1), `0 ≤ q < 1`, renormalized.
pub fn thermal<T: Real>(rep: &PhaseSpaceRep<T>, q: T) -> Result<DensityOperator<T>> {
    require_1d(rep)?;
    if !(q >= T::zero() && q < T::one()) {
        return Err(Error::InvalidArgument("thermal ratio q must lie in [0, 1)".into()));
    }
    let mut w = Vec::with_capacity(rep.n());
    let mut v = T::one();
    for _ in 0..rep.n() {
        w.push(v);
        v *= q;
    }
    let total = w.iter().fold(T::zero(), |a, &b| a + b);
    let w: Vec<T> = w.into_iter().map(|x| x / total).collect();
    DensityOperator::from_diagonal(&w)
}

/// Multi-indices with every axis level `< levels`, in basis order.
fn low_level_indices<T: Real>(rep: &PhaseSpaceRep<T>, levels: usize) -> Vec<usize> {
    (0..rep.dim())
        .filter(|&i| {
            let mut j = i;
            (0..rep.d()).all(|_| {
                let ok = j % rep.n() < levels;
                j /= rep.n();
                ok
            })
        })
        .collect()
}

/// Random induced-measure state supported on the levels `< levels` of every
/// axis; with `levels < N` all commutators with `x, p` are exact.
pub fn random_low_level<T: Real>(rep: &PhaseSpaceRep<T>, levels: usize, rank: usize, seed: u64) -> Result<DensityOperator<T>> {
    if levels == 0 || levels > rep.n() {
        return Err(Error::InvalidArgument(format!("support levels {levels} outside 1..={}", rep.n())));
    }
    let idx = low_level_indices(rep, levels);
    if rank == 0 || rank > idx.len() {
        return Err(Error::InvalidRank { rank, dim: idx.len() });
    }
    let mut rng = seeded_rng(seed);
    let g: CMatrix<T> = gaussian_matrix(idx.len(), rank, &mut rng);
    let small = &g * g.adjoint();
    let mut m = CMatrix::zeros(rep.dim(), rep.dim());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] = small[(a, b)];
        }
    }
    DensityOperator::normalized(m)
}

/// `ρ₁ ⊗ ρ₂ ⊗ …` in axis order.
pub fn product<T: Real>(factors: &[DensityOperator<T>]) -> Result<DensityOperator<T>> {
    let mut it = factors.iter();
    let first = it.next().ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    let mut m = first.matrix().clone();
    for f in it {
        m = m.kronecker(f.matrix());
    }
    DensityOperator::from_matrix(m)
}
