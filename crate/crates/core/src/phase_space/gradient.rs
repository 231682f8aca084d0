use num_complex::Complex;

use super::PhaseSpaceRep;
use crate::error::{Error, Result};
use crate::operator::{commutator, HermitianOperator, SchattenExponent};
use crate::operator::lp_of;
use crate::scalar::{CMatrix, Real};

/// Largest supported order for [`iterated_gradient_norm`].
pub const MAX_GRADIENT_ORDER: usize = 4;

/// Quantum gradient `∇ₕA = (dx, dv)` with `dxᵢ = (1/iħ)[xᵢ, A]` and
/// `dvᵢ = [∂ᵢ, A] = (i/ħ)[pᵢ, A]`.
///
/// Under the Wigner transform `dv` becomes `∂ₓ f_A` and `dx` becomes
/// `∂ᵥ f_A`.
#[derive(Clone, Debug)]
pub struct QuantumGradient<T: Real> {
    pub dx_parts: Vec<CMatrix<T>>,
    pub dv_parts: Vec<CMatrix<T>>,
}

impl<T: Real> QuantumGradient<T> {
    pub fn components(&self) -> impl Iterator<Item = &CMatrix<T>> {
        self.dx_parts.iter().chain(self.dv_parts.iter())
    }

    /// `|∇ₕA|² = Σᵢ (dxᵢ* dxᵢ + dvᵢ* dvᵢ)`.
    pub fn magnitude_squared(&self) -> CMatrix<T> {
        magnitude_squared(self.components())
    }

    /// `‖ |∇ₕA| ‖_p`.
    pub fn norm(&self, p: SchattenExponent<T>) -> T {
        gradient_magnitude_norm(self.components(), p)
    }

    /// `h^{d/p} ‖ |∇ₕA| ‖_p`.
    pub fn scaled_norm(&self, p: SchattenExponent<T>, rep: &PhaseSpaceRep<T>) -> T {
        rep.planck().powf(T::count(rep.d()) * p.reciprocal()) * self.norm(p)
    }

    /// `‖ |dx| ‖_p` alone.
    pub fn dx_norm(&self, p: SchattenExponent<T>) -> T {
        gradient_magnitude_norm(self.dx_parts.iter(), p)
    }

    pub fn dv_norm(&self, p: SchattenExponent<T>) -> T {
        gradient_magnitude_norm(self.dv_parts.iter(), p)
    }
}

fn magnitude_squared<'a, T: Real>(parts: impl Iterator<Item = &'a CMatrix<T>>) -> CMatrix<T> {
    let mut acc: Option<CMatrix<T>> = None;
    for c in parts {
        let term = c.adjoint() * c;
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc.unwrap_or_else(|| CMatrix::zeros(0, 0))
}

/// `‖ (Σ C*C)^{1/2} ‖_p` over a family of components.
pub fn gradient_magnitude_norm<'a, T: Real>(parts: impl Iterator<Item = &'a CMatrix<T>>, p: SchattenExponent<T>) -> T {
    let parts: Vec<&CMatrix<T>> = parts.collect();
    if let SchattenExponent::Finite(two) = p {
        if two == T::lit(2.0) {
            return parts.iter().fold(T::zero(), |acc, c| acc + c.norm_squared()).sqrt();
        }
    }
    let m = magnitude_squared(parts.into_iter());
    if m.is_empty() {
        return T::zero();
    }
    let h = HermitianOperator::from_hermitian_part(m);
    let s: Vec<T> = h.spectrum().eigenvalues.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    lp_of(&s, p)
}

/// Computes `∇ₕA` in the representation `rep`.
pub fn quantum_gradient<T: Real>(a: &CMatrix<T>, rep: &PhaseSpaceRep<T>) -> Result<QuantumGradient<T>> {
    rep.check_dim(a)?;
    let inv_hbar = T::one() / rep.hbar();
    let minus_i_over_hbar = Complex::new(T::zero(), -inv_hbar);
    let i_over_hbar = Complex::new(T::zero(), inv_hbar);
    let mut dx_parts = Vec::with_capacity(rep.d());
    let mut dv_parts = Vec::with_capacity(rep.d());
    for axis in 0..rep.d() {
        dx_parts.push(commutator(rep.x(axis).matrix(), a)? * minus_i_over_hbar);
        dv_parts.push(commutator(rep.p(axis).matrix(), a)? * i_over_hbar);
    }
    Ok(QuantumGradient { dx_parts, dv_parts })
}

/// All `(2d)^k` components of `∇ₕ^k A`, in nested order.
pub(crate) fn iterated_components<T: Real>(a: &CMatrix<T>, rep: &PhaseSpaceRep<T>, k: usize) -> Result<Vec<CMatrix<T>>> {
    if k == 0 || k > MAX_GRADIENT_ORDER {
        return Err(Error::InvalidArgument(format!("gradient order must be in 1..={MAX_GRADIENT_ORDER}, got {k}")));
    }
    let mut level = vec![a.clone()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() * 2 * rep.d());
        for c in &level {
            let g = quantum_gradient(c, rep)?;
            next.extend(g.dx_parts);
            next.extend(g.dv_parts);
        }
        level = next;
    }
    Ok(level)
}

/// `‖ |∇ₕ^k A| ‖_p` where `|∇ₕ^k A|²` sums `C*C` over all k-fold components.
pub fn iterated_gradient_norm<T: Real>(a: &CMatrix<T>, rep: &PhaseSpaceRep<T>, k: usize, p: SchattenExponent<T>) -> Result<T> {
    let parts = iterated_components(a, rep, k)?;
    Ok(gradient_magnitude_norm(parts.iter(), p))
}
