//! Pinned sample ensembles for the empirical-constant estimators.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classical::DiffeoFamily;
use crate::error::{Error, Result};
use crate::operator::{substream_rng, DensityOperator, HermitianOperator};
use crate::phase_space::{build_harmonic_rep, states, PhaseSpaceRep};
use crate::scalar::{cis, cr, CMatrix, Real};

/// Largest number of modes per axis in a trigonometric symbol.
pub const MAX_SYMBOL_MODES: usize = 8;

/// Identifies one sample: the ħ cell, the basis size and the sample index.
/// The random draw depends on `(hbar_index, index)` only, so the same sample
/// can be evaluated at several basis sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleId {
    pub hbar_index: usize,
    pub hbar: f64,
    pub n: usize,
    pub index: usize,
}

impl SampleId {
    pub(crate) fn stream(&self) -> u64 {
        ((self.hbar_index as u64) << 32) | self.index as u64
    }
}

/// ħ values × basis sizes × samples per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleGrid {
    pub hbars: Vec<f64>,
    pub levels: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl EnsembleGrid {
    pub fn validate(&self) -> Result<()> {
        if self.hbars.is_empty() || self.levels.is_empty() || self.samples == 0 {
            return Err(Error::InvalidArgument("ensemble needs at least one ħ, one basis size and one sample".into()));
        }
        if let Some(h) = self.hbars.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidArgument(format!("ħ must be positive, got {h}")));
        }
        if self.levels.contains(&0) {
            return Err(Error::InvalidArgument("basis size must be positive".into()));
        }
        Ok(())
    }

    /// All sample ids in (ħ, N, index) order.
    pub fn ids(&self) -> Vec<SampleId> {
        let mut out = Vec::with_capacity(self.hbars.len() * self.levels.len() * self.samples);
        for (hbar_index, &hbar) in self.hbars.iter().enumerate() {
            for &n in &self.levels {
                for index in 0..self.samples {
                    out.push(SampleId { hbar_index, hbar, n, index });
                }
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        format!("hbar={:?};N={:?};samples={};seed={}", self.hbars, self.levels, self.samples, self.seed)
    }
}

/// `a(x, v) = Σ c_jk cos(κ(jx + kv) + φ_jk)` over `|j|, |k| ≤ modes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigSymbol {
    pub base_frequency: f64,
    pub terms: Vec<SymbolTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub j: i32,
    pub k: i32,
    pub coefficient: f64,
    pub phase: f64,
}

impl TrigSymbol {
    /// Coefficients `~ N(0, (1 + j² + k²)⁻²)`, phases uniform.
    pub fn random<R: Rng + ?Sized>(modes: usize, base_frequency: f64, rng: &mut R) -> Self {
        let m = modes as i32;
        let mut terms = Vec::new();
        for j in -m..=m {
            for k in -m..=m {
                let decay = 1.0 / (1.0 + (j * j + k * k) as f64);
                let z: f64 = rng.sample(StandardNormal);
                let phase = rng.random_range(0.0..2.0 * PI);
                terms.push(SymbolTerm { j, k, coefficient: decay * z, phase });
            }
        }
        Self { base_frequency, terms }
    }

    pub fn eval(&self, x: f64, v: f64) -> f64 {
        let kappa = self.base_frequency;
        self.terms
            .iter()
            .map(|t| t.coefficient * (kappa * (t.j as f64 * x + t.k as f64 * v) + t.phase).cos())
            .sum()
    }

    /// Weyl quantization, with each `cos` term mapped to the Hermitian part of
    /// `e^{iφ} exp(i(ξx̂ + ηp̂))`.
    pub fn quantize<T: Real>(&self, weyl: &WeylOperators<T>) -> HermitianOperator<T> {
        let n = weyl.n;
        let mut m = CMatrix::<T>::zeros(n, n);
        for t in &self.terms {
            let w = weyl.operator(self.base_frequency * t.j as f64, self.base_frequency * t.k as f64);
            m += w * Complex::new(T::lit(t.coefficient * t.phase.cos()), T::lit(t.coefficient * t.phase.sin()));
        }
        HermitianOperator::from_hermitian_part(m)
    }
}

/// Weyl operators `exp(i(ξx̂ + ηp̂))` on `N` levels, computed in a basis of `2N`
/// levels and truncated.
pub struct WeylOperators<T: Real> {
    aux: PhaseSpaceRep<T>,
    n: usize,
}

impl<T: Real> WeylOperators<T> {
    pub fn new(n: usize, hbar: T) -> Result<Self> {
        Ok(Self { aux: build_harmonic_rep(1, 2 * n, hbar)?, n })
    }

    /// Uses `ξx̂ + ηp̂ = s D* x̂ D` with `s = |(ξ, η)|` and `D = diag(e^{-iθn})`.
    pub fn operator(&self, xi: f64, eta: f64) -> CMatrix<T> {
        let s = xi.hypot(eta);
        let theta = eta.atan2(xi);
        let e = self.aux.exp_i_x(0, T::lit(s));
        CMatrix::from_fn(self.n, self.n, |a, b| {
            e[(a, b)] * cis(T::lit(theta * (a as f64 - b as f64)))
        })
    }
}

/// `diag(exp(−ħ(n+½)/(2w²)))`.
pub fn envelope<T: Real>(n: usize, hbar: f64, width: f64) -> Vec<T> {
    (0..n).map(|k| T::lit((-hbar * (k as f64 + 0.5) / (2.0 * width * width)).exp())).collect()
}

fn enveloped<T: Real>(a: &HermitianOperator<T>, g: &[T]) -> HermitianOperator<T> {
    let m = a.matrix();
    HermitianOperator::from_hermitian_part(CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * cr(g[i] * g[j])))
}

/// Pairs `(G Op(a) G, G Op(b) G)` for independent random trigonometric symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolEnsemble {
    pub grid: EnsembleGrid,
    pub modes: usize,
    pub base_frequency: f64,
    pub envelope_width: f64,
}

impl SymbolEnsemble {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.modes == 0 || self.modes > MAX_SYMBOL_MODES {
            return Err(Error::InvalidArgument(format!("symbol modes must be in 1..={MAX_SYMBOL_MODES}")));
        }
        if !(self.base_frequency > 0.0 && self.envelope_width > 0.0) {
            return Err(Error::InvalidArgument("symbol frequency and envelope width must be positive".into()));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "trig-symbols(modes={},kappa={},width={});{}",
            self.modes,
            self.base_frequency,
            self.envelope_width,
            self.grid.describe()
        )
    }

    pub fn symbols(&self, id: &SampleId) -> (TrigSymbol, TrigSymbol) {
        let mut rng = substream_rng(self.grid.seed, id.stream());
        let a = TrigSymbol::random(self.modes, self.base_frequency, &mut rng);
        let b = TrigSymbol::random(self.modes, self.base_frequency, &mut rng);
        (a, b)
    }

    pub fn sample<T: Real>(&self, id: &SampleId, weyl: &WeylOperators<T>) -> (HermitianOperator<T>, HermitianOperator<T>) {
        let g = envelope::<T>(id.n, id.hbar, self.envelope_width);
        let (a, b) = self.symbols(id);
        (enveloped(&a.quantize(weyl), &g), enveloped(&b.quantize(weyl), &g))
    }
}

/// Operator pairs for the commutator-versus-gradient estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pair", rename_all = "lowercase")]
pub enum OperatorPair {
    Canonical,
    Diffeo(DiffeoFamily),
}

impl OperatorPair {
    /// `(x̂, p̂)` or the Weyl quantization of `(α, β)`; the cubic term uses `f(x̂)`.
    pub fn quantize<T: Real>(&self, rep: &PhaseSpaceRep<T>) -> (HermitianOperator<T>, HermitianOperator<T>) {
        let x = rep.x(0).matrix();
        let p = rep.p(0).matrix();
        let lin = |a: f64, b: f64, c: f64, d: f64| {
            (
                HermitianOperator::from_hermitian_part(x * cr(T::lit(a)) + p * cr(T::lit(b))),
                HermitianOperator::from_hermitian_part(x * cr(T::lit(c)) + p * cr(T::lit(d))),
            )
        };
        match *self {
            Self::Canonical => lin(1.0, 0.0, 0.0, 1.0),
            Self::Diffeo(DiffeoFamily::Rotation { theta }) => lin(theta.cos(), -theta.sin(), theta.sin(), theta.cos()),
            Self::Diffeo(DiffeoFamily::Shear { c }) => lin(1.0, 0.0, c, 1.0),
            Self::Diffeo(DiffeoFamily::Stretch { lambda }) => lin(lambda, 0.0, 0.0, 1.0 / lambda),
            Self::Diffeo(DiffeoFamily::Cubic { c }) => {
                let cc = T::lit(c);
                let a = rep.x_spectrum(0).apply(|l| cr(l + cc * l * l * l));
                (HermitianOperator::from_hermitian_part(a), rep.p(0).clone())
            }
        }
    }
}

/// State families drawn for the commutator-versus-gradient estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum StateChoice {
    Coherent { re: f64, im: f64 },
    Squeezed { r: f64 },
    Thermal { q: f64 },
    RandomLowLevel { levels: usize, rank: usize, seed: u64 },
}

impl StateChoice {
    pub fn build<T: Real>(&self, rep: &PhaseSpaceRep<T>) -> Result<DensityOperator<T>> {
        match *self {
            Self::Coherent { re, im } => states::coherent(rep, Complex::new(T::lit(re), T::lit(im))),
            Self::Squeezed { r } => states::squeezed(rep, T::lit(r)),
            Self::Thermal { q } => states::thermal(rep, T::lit(q)),
            Self::RandomLowLevel { levels, rank, seed } => states::random_low_level(rep, levels.min(rep.n()), rank.min(levels.min(rep.n())), seed),
        }
    }
}

/// Canonical and diffeomorphism pairs against coherent, squeezed, thermal and
/// random low-level states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEnsemble {
    pub grid: EnsembleGrid,
}

impl PairEnsemble {
    pub fn describe(&self) -> String {
        format!("canonical+diffeo pairs x coherent/squeezed/thermal/random states;{}", self.grid.describe())
    }

    /// Pair kind cycles with the index, state kind with `index / 5`; parameters are random.
    pub fn draw(&self, id: &SampleId) -> (OperatorPair, StateChoice) {
        let mut rng = substream_rng(self.grid.seed, id.stream());
        let pair = match id.index % 5 {
            0 => OperatorPair::Canonical,
            1 => OperatorPair::Diffeo(DiffeoFamily::Rotation { theta: rng.random_range(0.0..PI) }),
            2 => OperatorPair::Diffeo(DiffeoFamily::Shear { c: rng.random_range(-1.0..1.0) }),
            3 => OperatorPair::Diffeo(DiffeoFamily::Stretch { lambda: rng.random_range(-0.5f64..0.5).exp() }),
            _ => OperatorPair::Diffeo(DiffeoFamily::Cubic { c: rng.random_range(0.0..0.2) }),
        };
        // Amplitudes shrink with √ħ so that states stay well inside the basis.
        let s = id.hbar.sqrt();
        let state = match (id.index / 5) % 4 {
            0 => StateChoice::Coherent { re: s * rng.random_range(-0.5..0.5), im: s * rng.random_range(-0.5..0.5) },
            1 => StateChoice::Squeezed { r: rng.random_range(-0.4..0.4) },
            2 => StateChoice::Thermal { q: rng.random_range(0.05..0.4) },
            _ => StateChoice::RandomLowLevel { levels: 4, rank: rng.random_range(1..=4), seed: rng.random() },
        };
        (pair, state)
    }
}

/// A pure state as a column, for tests.
#[cfg(test)]
pub(crate) fn basis_vector<T: Real>(n: usize, k: usize) -> nalgebra::DVector<Complex<T>> {
    let mut v = nalgebra::DVector::zeros(n);
    v[k] = cr(T::one());
    v
}
