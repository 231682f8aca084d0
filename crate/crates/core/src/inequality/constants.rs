//! Closed-form constants: sharp Sobolev constants and the one-dimensional `C_s`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Γ(d + ½) / √π = (2d)! / (4^d d!)`, exact.
pub fn half_integer_gamma_ratio(d: u32) -> BigRational {
    let mut num = BigUint::one();
    for k in (d + 1)..=(2 * d) {
        num *= BigUint::from(k);
    }
    let den = BigUint::from(4u32).pow(d);
    BigRational::new(num.into(), den.into())
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().expect("fits in f64").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln Γ(d + ½)` with the rational factor evaluated exactly.
fn ln_gamma_half_integer(d: u32) -> f64 {
    let r = half_integer_gamma_ratio(d);
    let num = r.numer().to_biguint().expect("positive");
    let den = r.denom().to_biguint().expect("positive");
    ln_biguint(&num) - ln_biguint(&den) + 0.5 * PI.ln()
}

/// Sharp constant of `Ḣ¹(ℝ^{2d}) → L^{2d/(d−1)}(ℝ^{2d})`:
/// `(C)² = (4π)^{−1/(2d)} Γ(d+½)^{1/d} / (d(d−1)π)`.
pub fn sobolev_constant_12(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("sobolev_constant_12 needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let ln_sq = -(4.0 * PI).ln() / (2.0 * df) + ln_gamma_half_integer(d as u32) / df - (df * (df - 1.0) * PI).ln();
    Ok((0.5 * ln_sq).exp())
}

/// `[C^S_{1,2}, C^S_{1,2} + (8π)^{−1/2}]`.
pub fn c_d_bounds(d: usize) -> Result<(f64, f64)> {
    let lo = sobolev_constant_12(d)?;
    Ok((lo, lo + 1.0 / (8.0 * PI).sqrt()))
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidArgument(format!("s must lie in (0, 1), got {s}")));
    }
    Ok(())
}

/// Sharp constant of `Ḣˢ(ℝ²) → L^{2/(1−s)}(ℝ²)` in the `Γ(1−s)/Γ(1+s)` form.
pub fn classical_fractional_sobolev(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok((gamma(1.0 - s) / gamma(1.0 + s)).sqrt() / (2f64.powf(s) * PI.powf(s / 2.0)))
}

/// The two closed forms of `C_s`: (reflection form, `Γ(1−s)/Γ(1+s)` form).
pub fn one_d_constant_forms(s: f64) -> Result<(f64, f64)> {
    check_s(s)?;
    let lead = (8.0 * PI).powf(-s / 2.0);
    let reflection = PI.powf((1.0 - s) / 2.0) / (2f64.powf(s) * (PI * s).sin().sqrt() * gamma(s) * s.sqrt());
    Ok((lead + reflection, lead + classical_fractional_sobolev(s)?))
}

/// `C_s`, the mean of its two closed forms.
pub fn one_d_constant(s: f64) -> Result<f64> {
    let (a, b) = one_d_constant_forms(s)?;
    Ok(0.5 * (a + b))
}

/// Sharp constant of `W^{1,1}(ℝ²) → L²(ℝ²)`, `1/(2√π)`.
pub fn sobolev_11_2d() -> f64 {
    0.5 / PI.sqrt()
}

/// Constants evaluated once for a given `d` and set of `s` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub d: usize,
    pub sobolev_12: f64,
    pub c_d_lower: f64,
    pub c_d_upper: f64,
    pub sobolev_11_2d: f64,
    pub c_s: Vec<OneDConstant>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneDConstant {
    pub s: f64,
    pub value: f64,
    pub reflection_form: f64,
    pub gamma_ratio_form: f64,
}

impl ConstantsTable {
    pub fn new(d: usize, s_values: &[f64]) -> Result<Self> {
        let (lo, hi) = c_d_bounds(d)?;
        let c_s = s_values
            .iter()
            .map(|&s| {
                let (a, b) = one_d_constant_forms(s)?;
                Ok(OneDConstant { s, value: 0.5 * (a + b), reflection_form: a, gamma_ratio_form: b })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, sobolev_12: lo, c_d_lower: lo, c_d_upper: hi, sobolev_11_2d: sobolev_11_2d(), c_s })
    }

    /// Largest disagreement between the two forms of `C_s`.
    pub fn max_form_disagreement(&self) -> f64 {
        self.c_s.iter().map(|c| (c.reflection_form - c.gamma_ratio_form).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_half_integer_gamma() {
        // Γ(5/2) = (3/4)√π
        let r = half_integer_gamma_ratio(2);
        assert_eq!(r, BigRational::new(3.into(), 4.into()));
        for d in 1..12u32 {
            let exact = ln_gamma_half_integer(d);
            let reference = statrs::function::gamma::ln_gamma(d as f64 + 0.5);
            assert!((exact - reference).abs() < 1e-13);
        }
        assert!(ln_gamma_half_integer(400).is_finite());
    }

    #[test]
    fn sobolev_12_values() {
        // Independent evaluation: (4π)^{-1/4} Γ(5/2)^{1/2} / (2π) with Γ(5/2) = 3√π/4.
        let g = 0.75 * PI.sqrt();
        let oracle = ((4.0 * PI).powf(-0.25) * g.sqrt() / (2.0 * PI)).sqrt();
        let c2 = sobolev_constant_12(2).unwrap();
        assert!((c2 - oracle).abs() < 1e-15);
        assert!((c2 - 0.312184).abs() < 1e-5);
        assert!(sobolev_constant_12(3).unwrap() < c2);
        assert!(sobolev_constant_12(1).is_err());
        let (lo, hi) = c_d_bounds(2).unwrap();
        assert!(lo <= hi);
        assert!((hi - 0.511655).abs() < 1e-5);
    }

    #[test]
    fn c_half() {
        let (a, b) = one_d_constant_forms(0.5).unwrap();
        assert!((a - b).abs() < 1e-12);
        let oracle = (8.0 * PI).powf(-0.25) + PI.powf(-0.25);
        assert!((one_d_constant(0.5).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 1.197753).abs() < 1e-5);
        assert!((classical_fractional_sobolev(0.5).unwrap() - PI.powf(-0.25)).abs() < 1e-14);
        assert!((PI.powf(-0.25) - 0.751126).abs() < 5e-7);
    }

    #[test]
    fn forms_agree_on_grid() {
        let s: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let t = ConstantsTable::new(2, &s).unwrap();
        assert!(t.max_form_disagreement() < 1e-12);
        assert!(one_d_constant(0.0).is_err());
        assert!(one_d_constant(1.0).is_err());
    }

    #[test]
    fn sobolev_11() {
        assert!((sobolev_11_2d() - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-16);
    }
}
