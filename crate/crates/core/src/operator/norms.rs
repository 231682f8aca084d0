use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{abs2, CMatrix, Real};

/// Schatten exponent `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchattenExponent<T: Real> {
    Finite(T),
    Infinity,
}

impl<T: Real> SchattenExponent<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidArgument(format!("Schatten exponent must be >= 1, got {}", p.as_f64())));
        }
        if !p.is_finite_value() {
            return Ok(Self::Infinity);
        }
        Ok(Self::Finite(p))
    }

    pub fn from_f64(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(Self::Infinity);
        }
        Self::new(T::lit(p))
    }

    /// `p' = p/(p−1)`; `1' = ∞` and `∞' = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Self::Infinity => Self::Finite(T::one()),
            Self::Finite(p) if p == T::one() => Self::Infinity,
            Self::Finite(p) => Self::Finite(p / (p - T::one())),
        }
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> T {
        match self {
            Self::Infinity => T::zero(),
            Self::Finite(p) => T::one() / p,
        }
    }

    pub fn value(self) -> T {
        match self {
            Self::Infinity => T::infinity(),
            Self::Finite(p) => p,
        }
    }
}

impl<T: Real> fmt::Display for SchattenExponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Infinity => write!(f, "inf"),
            Self::Finite(p) => write!(f, "{}", p.as_f64()),
        }
    }
}

pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().singular_values().iter().copied().collect()
}

pub fn frobenius_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + abs2(*z)).sqrt()
}

/// `ℓᵖ` norm of a list of nonnegative numbers, computed relative to the maximum.
pub(crate) fn lp_of<T: Real>(values: &[T], p: SchattenExponent<T>) -> T {
    let max = values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    match p {
        SchattenExponent::Infinity => max,
        SchattenExponent::Finite(_) if max == T::zero() => T::zero(),
        SchattenExponent::Finite(p) => {
            let sum = values.iter().fold(T::zero(), |acc, &s| acc + (s.abs() / max).powf(p));
            max * sum.powf(T::one() / p)
        }
    }
}

/// `(Σ s_k^p)^{1/p}` over the singular values; the largest one for `p = ∞`.
pub fn schatten_norm<T: Real>(m: &CMatrix<T>, p: SchattenExponent<T>) -> Result<T> {
    if m.iter().any(|z| !z.re.is_finite_value() || !z.im.is_finite_value()) {
        return Err(Error::NonFinite);
    }
    if let SchattenExponent::Finite(two) = p {
        if two == T::lit(2.0) {
            return Ok(frobenius_norm(m));
        }
    }
    Ok(lp_of(&singular_values(m), p))
}

/// Phase-space normalized norm `h^{d/p} ‖M‖_p` with `h = 2πħ`.
pub fn scaled_schatten_norm<T: Real>(m: &CMatrix<T>, p: SchattenExponent<T>, hbar: T, d: usize) -> Result<T> {
    if !(hbar > T::zero()) {
        return Err(Error::InvalidArgument("hbar must be positive".into()));
    }
    let h = T::two_pi() * hbar;
    let scale = h.powf(T::count(d) * p.reciprocal());
    Ok(scale * schatten_norm(m, p)?)
}
