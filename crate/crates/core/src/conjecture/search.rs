//! Randomized simplex search for states and observables violating
//! `√(I_A I_B) ≥ ½|Tr([A,B]ρ)|` for the Wigner–Yanase skew information.

use num_complex::Complex;
use rand_distr::StandardNormal;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::nelder_mead;
use crate::error::{Error, Result};
use crate::info::{skew_information, SkewMethod};
use crate::operator::{
    commutator, frobenius_norm, read_matrix, substream_rng, trace_product, write_matrix, DensityOperator,
    HermitianOperator, MatrixKind,
};
use crate::scalar::{cabs, CMatrix, Real};

/// Number of independent restarts.
pub const DEFAULT_RESTARTS: usize = 32;
/// A witness counts as a violation when its ratio is below `1 − SUCCESS_MARGIN`.
pub const SUCCESS_MARGIN: f64 = 1e-6;
/// Initial simplex edge length in parameter space.
const SIMPLEX_STEP: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SearchResult<T: Real> {
    pub best_ratio: f64,
    pub witness_state: DensityOperator<T>,
    pub witness_observables: (HermitianOperator<T>, HermitianOperator<T>),
    /// Objective evaluations spent (at least one per restart).
    pub iterations: usize,
    pub seed: u64,
    pub converged: bool,
    pub dim: usize,
    pub budget: usize,
    pub restarts: usize,
}

/// Serialized form; matrices are stored in the operator exchange text format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub dim: usize,
    pub seed: u64,
    pub budget: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
    pub best_ratio: f64,
    pub witness: WitnessRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub state: String,
    pub a: String,
    pub b: String,
}

/// Recomputed values for a stored witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// Objective through the spectral skew path (the one the search minimizes).
    pub ratio: f64,
    /// Objective through the commutator skew path.
    pub ratio_commutator_path: f64,
    pub skew_a: f64,
    pub skew_b: f64,
    /// `½|Tr([A,B]ρ)|`.
    pub half_commutator: f64,
}

/// `√(I_A I_B) / (½|Tr([A,B]ρ)|)`, `∞` when the denominator vanishes.
pub fn skew_violation_ratio<T: Real>(
    rho: &DensityOperator<T>,
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<f64> {
    Ok(witness_check_with(rho, a, b, SkewMethod::Spectral)?.0)
}

fn witness_check_with<T: Real>(
    rho: &DensityOperator<T>,
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    method: SkewMethod,
) -> Result<(f64, f64, f64, f64)> {
    let ia = skew_information(rho, a, method)?.as_f64();
    let ib = skew_information(rho, b, method)?.as_f64();
    let comm = commutator(a.matrix(), b.matrix())?;
    let half = 0.5 * cabs(trace_product(&comm, rho.matrix())).as_f64();
    let num = (ia.max(0.0) * ib.max(0.0)).sqrt();
    let ratio = if half > 0.0 { num / half } else { f64::INFINITY };
    Ok((ratio, ia, ib, half))
}

/// Recomputes the objective on a witness through both skew-information paths.
pub fn check_witness<T: Real>(
    rho: &DensityOperator<T>,
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<WitnessCheck> {
    let (ratio, skew_a, skew_b, half_commutator) = witness_check_with(rho, a, b, SkewMethod::Spectral)?;
    let (ratio_commutator_path, ..) = witness_check_with(rho, a, b, SkewMethod::Commutator)?;
    Ok(WitnessCheck { ratio, ratio_commutator_path, skew_a, skew_b, half_commutator })
}

fn parameter_count(dim: usize) -> usize {
    4 * dim * dim
}

fn factor_from<T: Real>(dim: usize, x: &[f64]) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex::new(T::lit(x[k]), T::lit(x[k + 1]))
    })
}

fn hermitian_from<T: Real>(dim: usize, x: &[f64]) -> HermitianOperator<T> {
    let mut m = CMatrix::<T>::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        m[(i, i)] = Complex::new(T::lit(x[k]), T::zero());
        k += 1;
        for j in i + 1..dim {
            let z = Complex::new(T::lit(x[k]), T::lit(x[k + 1]));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    HermitianOperator::from_hermitian_part(m)
}

type Witness<T> = (DensityOperator<T>, HermitianOperator<T>, HermitianOperator<T>);

/// `ρ = GG*/Tr GG*`, and `A`, `B` from Hermitian coordinates scaled to unit Frobenius norm.
fn decode<T: Real>(dim: usize, x: &[f64]) -> Result<Witness<T>> {
    let g = factor_from::<T>(dim, &x[..2 * dim * dim]);
    let rho = DensityOperator::normalized(&g * g.adjoint())?;
    let unit = |h: HermitianOperator<T>| {
        let n = frobenius_norm(h.matrix());
        if n > T::zero() { h.scaled(T::one() / n) } else { h }
    };
    let a = unit(hermitian_from(dim, &x[2 * dim * dim..3 * dim * dim]));
    let b = unit(hermitian_from(dim, &x[3 * dim * dim..]));
    Ok((rho, a, b))
}

fn objective<T: Real>(dim: usize, x: &[f64]) -> f64 {
    decode::<T>(dim, x)
        .and_then(|(rho, a, b)| skew_violation_ratio(&rho, &a, &b))
        .unwrap_or(f64::INFINITY)
}

/// Searches with [`DEFAULT_RESTARTS`] restarts; see [`search_skew_violation_with`].
pub fn search_skew_violation<T: Real>(dim: usize, budget: usize, seed: u64) -> Result<SearchResult<T>> {
    search_skew_violation_with(dim, budget, seed, DEFAULT_RESTARTS)
}

/// Runs `restarts` independent simplex searches in parallel, restart `r` drawing its
/// start from substream `r` of `seed` and spending an equal share of `budget`.
/// A zero budget only scores the start points and never reports convergence.
pub fn search_skew_violation_with<T: Real>(
    dim: usize,
    budget: usize,
    seed: u64,
    restarts: usize,
) -> Result<SearchResult<T>> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("search dimension must be at least 2, got {dim}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let n_params = parameter_count(dim);
    let runs: Vec<_> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream_rng(seed, r as u64);
            let x0: Vec<f64> = (0..n_params).map(|_| rng.sample(StandardNormal)).collect();
            let share = budget / restarts + usize::from(r < budget % restarts);
            nelder_mead(|x| objective::<T>(dim, x), &x0, SIMPLEX_STEP, share)
        })
        .collect();
    let iterations = runs.iter().map(|m| m.evaluations).sum();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("at least one restart");
    let (rho, a, b) = decode::<T>(dim, &best.x)?;
    let best_ratio = skew_violation_ratio(&rho, &a, &b)?;
    Ok(SearchResult {
        best_ratio,
        witness_state: rho,
        witness_observables: (a, b),
        iterations,
        seed,
        converged: budget > 0 && best_ratio < 1.0 - SUCCESS_MARGIN,
        dim,
        budget,
        restarts,
    })
}

impl<T: Real> SearchResult<T> {
    pub fn check(&self) -> Result<WitnessCheck> {
        check_witness(&self.witness_state, &self.witness_observables.0, &self.witness_observables.1)
    }

    pub fn to_record(&self) -> SearchRecord {
        SearchRecord {
            dim: self.dim,
            seed: self.seed,
            budget: self.budget,
            restarts: self.restarts,
            iterations: self.iterations,
            converged: self.converged,
            best_ratio: self.best_ratio,
            witness: WitnessRecord {
                state: write_matrix(self.witness_state.matrix(), MatrixKind::Density),
                a: write_matrix(self.witness_observables.0.matrix(), MatrixKind::Hermitian),
                b: write_matrix(self.witness_observables.1.matrix(), MatrixKind::Hermitian),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("SearchRecord serializes")
    }

    /// Rebuilds a result from its record; the stored ratio is kept as recorded.
    pub fn from_record(record: &SearchRecord) -> Result<Self> {
        let (rho, a, b) = record.witness()?;
        Ok(Self {
            best_ratio: record.best_ratio,
            witness_state: rho,
            witness_observables: (a, b),
            iterations: record.iterations,
            seed: record.seed,
            converged: record.converged,
            dim: record.dim,
            budget: record.budget,
            restarts: record.restarts,
        })
    }
}

impl SearchRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn witness<T: Real>(&self) -> Result<Witness<T>> {
        let rho = read_matrix::<T>(&self.witness.state)?.into_density()?;
        let a = read_matrix::<T>(&self.witness.a)?.into_hermitian();
        let b = read_matrix::<T>(&self.witness.b)?.into_hermitian();
        for m in [a.matrix(), b.matrix()] {
            if m.nrows() != rho.dim() {
                return Err(Error::DimensionMismatch { expected: rho.dim(), got: m.nrows() });
            }
        }
        Ok((rho, a, b))
    }
}
