use crate::scalar::Real;

/// Hermite functions `ψ_0 … ψ_{n−1}` at `x` for the oscillator with scale `ħ`:
/// `ψ_k(x) = (πħ)^{-1/4} (2^k k!)^{-1/2} H_k(x/√ħ) e^{-x²/(2ħ)}`.
///
/// Three-term recurrence, stable for all orders used here.
pub fn hermite_functions<T: Real>(x: T, n: usize, hbar: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let xi = x / hbar.sqrt();
    let psi0 = (T::pi() * hbar).powf(T::lit(-0.25)) * (-xi * xi / T::lit(2.0)).exp();
    out.push(psi0);
    if n == 1 {
        return out;
    }
    out.push(T::lit(2.0).sqrt() * xi * psi0);
    for k in 1..n - 1 {
        let kf = T::count(k);
        let next = (T::lit(2.0) / (kf + T::one())).sqrt() * xi * out[k] - (kf / (kf + T::one())).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}
