//! Finite-dimensional laboratory for Wigner–Yanase skew information, SLD
//! Fisher information and quantum Sobolev-type inequalities on truncated
//! harmonic-oscillator bases.
//!
//! All numerical types are generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the scalar for common use.

pub mod classical;
pub mod conjecture;
pub mod error;
pub mod inequality;
pub mod info;
pub mod operator;
pub mod phase_space;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{CMatrix, Real};

pub type Density64 = operator::DensityOperator<f64>;
pub type Density32 = operator::DensityOperator<f32>;
pub type Hermitian64 = operator::HermitianOperator<f64>;
pub type Hermitian32 = operator::HermitianOperator<f32>;
pub type Rep64 = phase_space::PhaseSpaceRep<f64>;
pub type Rep32 = phase_space::PhaseSpaceRep<f32>;
pub type WignerField64 = phase_space::WignerField<f64>;
pub type GridField64 = classical::GridField<f64>;
pub type SearchResult64 = conjecture::SearchResult<f64>;
