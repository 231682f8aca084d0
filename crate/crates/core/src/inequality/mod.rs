//! Checkers for the proved inequalities, each returning [`RatioReport`]s.
//!
//! Passing checks use the constant choice that makes the inequality hardest
//! to satisfy, so a pass holds whatever the exact constant is.

mod constants;

pub use constants::{
    c_d_bounds, classical_fractional_sobolev, half_integer_gamma_ratio, one_d_constant, one_d_constant_forms,
    sobolev_11_2d, sobolev_constant_12, ConstantsTable, OneDConstant,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::info::{sld_fisher, skew_information, variance, vector_information, FisherMethod, Functional, SkewMethod};
use crate::operator::{commutator, schatten_norm, scaled_schatten_norm, trace_product, DensityOperator, HermitianOperator, SchattenExponent};
use crate::phase_space::{quantum_gradient, PhaseSpaceRep, EDGE_MASS_THRESHOLD};
use crate::report::{CheckKind, InputsDigest, RatioReport, DISCRETE_SLACK, EXACT_SLACK};
use crate::scalar::{cr, Real};

/// Exponents used by pinned sweeps.
pub const P_GRID: [f64; 5] = [1.25, 1.5, 2.0, 3.0, 4.0];

/// Sides below this magnitude are treated as zero in exact checks.
pub const ZERO_FLOOR: f64 = 1e-12;

fn digest_pair<T: Real>(name: &str, rho: &DensityOperator<T>, a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> String {
    InputsDigest::new().label(name).matrix(rho.matrix()).matrix(a.matrix()).matrix(b.matrix()).finish()
}

/// `½ |Tr([A, B] ρ)|`.
pub fn commutator_expectation<T: Real>(rho: &DensityOperator<T>, a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    if a.dim() != rho.dim() || b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: a.dim().max(b.dim()) });
    }
    let c = commutator(a.matrix(), b.matrix())?;
    Ok(T::lit(0.5) * crate::scalar::cabs(trace_product(&c, rho.matrix())))
}

/// Robertson: `σ_A σ_B ≥ ½ |Tr([A, B] ρ)|`.
pub fn check_heisenberg<T: Real>(rho: &DensityOperator<T>, a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<RatioReport> {
    let rhs = commutator_expectation(rho, a, b)?;
    let lhs = (variance(rho, a)? * variance(rho, b)?).sqrt();
    Ok(RatioReport::greater_equal("heisenberg", lhs.as_f64(), rhs.as_f64(), EXACT_SLACK, ZERO_FLOOR)
        .with_digest(digest_pair("heisenberg", rho, a, b)))
}

/// `σ² ≥ J/4` and `J/4 ≥ I`, as two reports.
pub fn check_hierarchy<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<[RatioReport; 2]> {
    let v = variance(rho, k)?.as_f64();
    let j4 = sld_fisher(rho, k, FisherMethod::Spectral)?.as_f64() / 4.0;
    let i = skew_information(rho, k, SkewMethod::Spectral)?.as_f64();
    let digest = InputsDigest::new().label("hierarchy").matrix(rho.matrix()).matrix(k.matrix()).finish();
    Ok([
        RatioReport::greater_equal("hierarchy_variance_fisher", v, j4, EXACT_SLACK, EXACT_SLACK).with_digest(digest.clone()),
        RatioReport::greater_equal("hierarchy_fisher_skew", j4, i, EXACT_SLACK, EXACT_SLACK).with_digest(digest),
    ])
}

/// `σ_A √(J_B/4) ≥ ½ |Tr([A, B] ρ)|`, plus the improvement `σ_A σ_B ≥ σ_A √(J_B/4)`.
pub fn check_cramer_rao<T: Real>(rho: &DensityOperator<T>, a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<[RatioReport; 2]> {
    let rhs = commutator_expectation(rho, a, b)?.as_f64();
    let sa = variance(rho, a)?.sqrt().as_f64();
    let sb = variance(rho, b)?.sqrt().as_f64();
    let jb = (sld_fisher(rho, b, FisherMethod::Spectral)?.as_f64() / 4.0).sqrt();
    let digest = digest_pair("cramer_rao", rho, a, b);
    Ok([
        RatioReport::greater_equal("cramer_rao", sa * jb, rhs, EXACT_SLACK, ZERO_FLOOR).with_digest(digest.clone()),
        RatioReport::greater_equal("cramer_rao_improvement", sa * sb, sa * jb, EXACT_SLACK, ZERO_FLOOR).with_digest(digest),
    ])
}

/// Which end of the admissible interval for `C_d` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdChoice {
    Lower,
    Upper,
}

fn skew_product<T: Real>(rho: &DensityOperator<T>, rep: &PhaseSpaceRep<T>) -> Result<T> {
    let ix = vector_information(rho, rep.x_ops(), Functional::Skew)?;
    let ip = vector_information(rho, rep.p_ops(), Functional::Skew)?;
    Ok((ix * ip).sqrt())
}

/// `√(I_x I_p) ≥ ħ/(8π C_d) ‖ρ‖_{d/(d−1)}` with the upper bound for `C_d`.
pub fn check_theorem_d<T: Real>(rho: &DensityOperator<T>, rep: &PhaseSpaceRep<T>) -> Result<RatioReport> {
    check_theorem_d_with(rho, rep, CdChoice::Upper)
}

pub fn check_theorem_d_with<T: Real>(rho: &DensityOperator<T>, rep: &PhaseSpaceRep<T>, choice: CdChoice) -> Result<RatioReport> {
    let d = rep.d();
    if d < 2 {
        return Err(Error::InvalidArgument("check_theorem_d needs d >= 2".into()));
    }
    rep.check_dim(rho.matrix())?;
    let mass = rep.check_truncation(rho.matrix(), EDGE_MASS_THRESHOLD)?;
    let (lo, hi) = c_d_bounds(d)?;
    let c_d = match choice {
        CdChoice::Lower => lo,
        CdChoice::Upper => hi,
    };
    let q = SchattenExponent::from_f64(d as f64 / (d as f64 - 1.0))?;
    let norm = schatten_norm(rho.matrix(), q)?.as_f64();
    let lhs = skew_product(rho, rep)?.as_f64();
    let rhs = rep.hbar().as_f64() / (8.0 * PI * c_d) * norm;
    let digest = InputsDigest::new().label("theorem_d").matrix(rho.matrix()).scalar(rep.hbar()).scalar(T::count(rep.n())).finish();
    Ok(RatioReport::greater_equal("theorem_d", lhs, rhs, DISCRETE_SLACK, 0.0)
        .with_digest(digest)
        .with_edge_mass(mass.as_f64()))
}

/// Right side of the one-dimensional bound, `ħ/(8π C_{1/p'}^{2p'}) ‖ρ‖_p^{p'}`.
fn theorem_1d_rhs(hbar: f64, p: f64, norm_p: f64) -> Result<f64> {
    let pc = p / (p - 1.0);
    let c = one_d_constant(1.0 / pc)?;
    Ok(hbar / (8.0 * PI * c.powf(2.0 * pc)) * norm_p.powf(pc))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must lie in (1, ∞), got {p}")));
    }
    Ok(())
}

/// `√(I_x I_p) ≥ ħ/(8π C_{1/p'}^{2p'}) ‖ρ‖_p^{p'}` in one dimension.
pub fn check_theorem_1d<T: Real>(rho: &DensityOperator<T>, rep: &PhaseSpaceRep<T>, p: f64) -> Result<RatioReport> {
    check_p(p)?;
    if rep.d() != 1 {
        return Err(Error::InvalidArgument("check_theorem_1d needs d = 1".into()));
    }
    rep.check_dim(rho.matrix())?;
    let mass = rep.check_truncation(rho.matrix(), EDGE_MASS_THRESHOLD)?;
    let norm = schatten_norm(rho.matrix(), SchattenExponent::from_f64(p)?)?.as_f64();
    let lhs = skew_product(rho, rep)?.as_f64();
    let rhs = theorem_1d_rhs(rep.hbar().as_f64(), p, norm)?;
    let digest = InputsDigest::new().label("theorem_1d").matrix(rho.matrix()).scalar(rep.hbar()).scalar(T::lit(p)).finish();
    Ok(RatioReport::greater_equal("theorem_1d", lhs, rhs, DISCRETE_SLACK, 0.0)
        .with_digest(digest)
        .with_edge_mass(mass.as_f64()))
}

/// The same ratio computed through scaled norms: `‖ρ‖_p = h^{−1/p} ‖ρ‖_{ℒᵖ}`.
pub fn theorem_1d_ratio_scaled<T: Real>(rho: &DensityOperator<T>, rep: &PhaseSpaceRep<T>, p: f64) -> Result<f64> {
    check_p(p)?;
    let h = rep.planck().as_f64();
    let scaled = scaled_schatten_norm(rho.matrix(), SchattenExponent::from_f64(p)?, rep.hbar(), 1)?.as_f64();
    let lhs = skew_product(rho, rep)?.as_f64();
    let rhs = theorem_1d_rhs(rep.hbar().as_f64(), p, h.powf(-1.0 / p) * scaled)?;
    Ok(lhs / rhs)
}

/// `‖∇̃ᵥρ‖_p` with `∇̃ᵥρ = (1/iħ)[x, ρ]`, the operator whose Wigner transform is `∂ᵥ f_ρ`.
pub fn velocity_gradient_norm<T: Real>(rho: &CMatrixRef<T>, rep: &PhaseSpaceRep<T>, p: SchattenExponent<T>) -> Result<T> {
    Ok(quantum_gradient(rho, rep)?.dx_norm(p))
}

type CMatrixRef<T> = crate::scalar::CMatrix<T>;

/// Upper and lower sides of the Fourier sandwich in one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `‖∇̃ᵥρ‖_p ≥ max_ξ ‖[e^{iξx}, ρ]‖_p/(ħ|ξ|)` (hard).
    pub upper: RatioReport,
    /// `max_ξ ‖[e^{iξx}, ρ]‖_p/(ħ|ξ|) ≥ ‖∇̃ᵥρ‖_p` (soft; sampling under-estimates the sup).
    pub lower: RatioReport,
    pub samples: Vec<(f64, f64)>,
}

/// Samples `‖[e^{iξx}, ρ]‖_p / (ħ|ξ|)` and compares against `‖∇̃ᵥρ‖_p`.
pub fn fourier_sandwich<T: Real>(
    rho: &DensityOperator<T>,
    rep: &PhaseSpaceRep<T>,
    p: f64,
    xi_samples: &[T],
    lower_slack: f64,
) -> Result<SandwichReport> {
    if xi_samples.is_empty() {
        return Err(Error::InvalidArgument("xi_samples is empty".into()));
    }
    if rep.d() != 1 {
        return Err(Error::InvalidArgument("fourier_sandwich is implemented for d = 1".into()));
    }
    let pe = SchattenExponent::from_f64(p)?;
    let grad = velocity_gradient_norm(rho.matrix(), rep, pe)?.as_f64();
    let hbar = rep.hbar().as_f64();
    let mut samples = Vec::with_capacity(xi_samples.len());
    let mut best = 0.0f64;
    for &xi in xi_samples {
        if xi == T::zero() {
            return Err(Error::InvalidArgument("ξ = 0 is excluded".into()));
        }
        let e = rep.exp_i_x(0, xi);
        let c = commutator(&e, rho.matrix())?;
        let r = schatten_norm(&c, pe)?.as_f64() / (hbar * xi.as_f64().abs());
        best = best.max(r);
        samples.push((xi.as_f64(), r));
    }
    let digest = InputsDigest::new().label("fourier_sandwich").matrix(rho.matrix()).scalar(T::lit(p)).finish();
    let mass = rep.edge_mass(rho.matrix()).as_f64();
    let floor = ZERO_FLOOR * grad.max(1.0);
    Ok(SandwichReport {
        upper: RatioReport::greater_equal("fourier_sandwich_upper", grad, best, DISCRETE_SLACK, floor)
            .with_digest(digest.clone())
            .with_edge_mass(mass),
        lower: RatioReport::greater_equal("fourier_sandwich_lower", best, grad, lower_slack, floor)
            .with_kind(CheckKind::Soft)
            .with_digest(digest)
            .with_edge_mass(mass),
        samples,
    })
}

/// `n` points spaced logarithmically on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Real functions with a certified global Lipschitz constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LipschitzFunction {
    Linear { slope: f64 },
    Constant { value: f64 },
    Tanh { scale: f64 },
    Sin { frequency: f64 },
}

impl LipschitzFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Linear { slope } => slope * x,
            Self::Constant { value } => value,
            Self::Tanh { scale } => (scale * x).tanh(),
            Self::Sin { frequency } => (frequency * x).sin(),
        }
    }

    /// `‖u'‖_∞`.
    pub fn lipschitz(&self) -> f64 {
        match *self {
            Self::Linear { slope } => slope.abs(),
            Self::Constant { .. } => 0.0,
            Self::Tanh { scale } => scale.abs(),
            Self::Sin { frequency } => frequency.abs(),
        }
    }
}

/// Empirical `‖[u(x), ρ]‖_p / (ħ ‖u'‖_∞ ‖∇̃ᵥρ‖_p)`, a lower bound for the best `c_p`.
pub fn check_operator_lipschitz<T: Real>(
    rho: &DensityOperator<T>,
    rep: &PhaseSpaceRep<T>,
    u: LipschitzFunction,
    p: f64,
) -> Result<RatioReport> {
    check_p(p)?;
    if rep.d() != 1 {
        return Err(Error::InvalidArgument("check_operator_lipschitz is implemented for d = 1".into()));
    }
    let pe = SchattenExponent::from_f64(p)?;
    let ux = rep.x_spectrum(0).apply(|l| cr(T::lit(u.eval(l.as_f64()))));
    let num = schatten_norm(&commutator(&ux, rho.matrix())?, pe)?.as_f64();
    let den = rep.hbar().as_f64() * u.lipschitz() * velocity_gradient_norm(rho.matrix(), rep, pe)?.as_f64();
    let num = if num <= ZERO_FLOOR * den.max(1.0) { 0.0 } else { num };
    let digest = InputsDigest::new().label("operator_lipschitz").matrix(rho.matrix()).scalar(T::lit(p)).finish();
    Ok(RatioReport::statistic("operator_lipschitz", num, den)
        .with_digest(digest)
        .with_edge_mass(rep.edge_mass(rho.matrix()).as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::phase_space::{build_harmonic_rep, states};

    fn herm(m: crate::scalar::CMatrix<f64>) -> HermitianOperator<f64> {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn heisenberg_ground_state_saturates() {
        let rep = build_harmonic_rep::<f64>(1, 64, 1.0).unwrap();
        let rho = states::ground(&rep).unwrap();
        let r = check_heisenberg(&rho, rep.x(0), rep.p(0)).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-8 && (r.rhs - 0.5).abs() < 1e-12);
        assert!((r.ratio - 1.0).abs() < 1e-8 && r.pass);
        assert_eq!(r.inputs_digest.len(), 64);
    }

    #[test]
    fn heisenberg_thermal_and_commuting() {
        let rep = build_harmonic_rep::<f64>(1, 48, 1.0).unwrap();
        let rho = states::thermal(&rep, 0.3).unwrap();
        assert!(check_heisenberg(&rho, rep.x(0), rep.p(0)).unwrap().ratio > 1.0);
        let q = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let z = herm(pauli::z());
        let r = check_heisenberg(&q, &z, &z).unwrap();
        assert!(r.pass && r.rhs == 0.0);
    }

    #[test]
    fn hierarchy_qubit_values() {
        let q = DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap();
        let [a, b] = check_hierarchy(&q, &herm(pauli::x())).unwrap();
        assert!((a.lhs - 1.0).abs() < 1e-14 && (a.rhs - 0.25).abs() < 1e-14);
        assert!((b.rhs - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-14);
        assert!(a.pass && b.pass);
        let [a, b] = check_hierarchy(&q, &herm(pauli::z())).unwrap();
        assert!(a.pass && b.pass);
        assert_eq!(b.ratio, 1.0);
    }

    #[test]
    fn hierarchy_pure_state_ratios_are_one() {
        let rep = build_harmonic_rep::<f64>(1, 12, 1.0).unwrap();
        let rho = states::coherent(&rep, num_complex::Complex::new(0.3, -0.2)).unwrap();
        let [a, b] = check_hierarchy(&rho, rep.x(0)).unwrap();
        assert!((a.ratio - 1.0).abs() < 1e-9 && (b.ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cramer_rao_saturation_and_improvement() {
        let rep = build_harmonic_rep::<f64>(1, 64, 1.0).unwrap();
        let g = states::ground(&rep).unwrap();
        let [cr_, imp] = check_cramer_rao(&g, rep.x(0), rep.p(0)).unwrap();
        assert!((cr_.ratio - 1.0).abs() < 1e-8);
        assert!(imp.pass);
        let t = states::thermal(&rep, 0.3).unwrap();
        let [cr_, imp] = check_cramer_rao(&t, rep.x(0), rep.p(0)).unwrap();
        let h = check_heisenberg(&t, rep.x(0), rep.p(0)).unwrap();
        assert!(cr_.pass && cr_.lhs < h.lhs && imp.ratio > 1.0);
        assert!((cr_.rhs - h.rhs).abs() < 1e-15);
    }

    #[test]
    fn theorem_d_ground_state() {
        let rep = build_harmonic_rep::<f64>(2, 8, 1.0).unwrap();
        let rho = states::ground(&rep).unwrap();
        let r = check_theorem_d(&rho, &rep).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-10);
        assert!((r.rhs - 0.07778).abs() < 1e-4);
        assert!(r.pass);
        let lo = check_theorem_d_with(&rho, &rep, CdChoice::Lower).unwrap();
        assert!(lo.ratio <= r.ratio && lo.pass);
        let rep1 = build_harmonic_rep::<f64>(1, 8, 1.0).unwrap();
        assert!(check_theorem_d(&states::ground(&rep1).unwrap(), &rep1).is_err());
    }

    #[test]
    fn theorem_d_squeezing_invariance() {
        let rep1 = build_harmonic_rep::<f64>(1, 16, 1.0).unwrap();
        let rep = build_harmonic_rep::<f64>(2, 16, 1.0).unwrap();
        for r in [0.1, 0.3] {
            let s = states::squeezed(&rep1, r).unwrap();
            let rho = states::product(&[s.clone(), s]).unwrap();
            let rep_ = check_theorem_d(&rho, &rep).unwrap();
            assert!((rep_.lhs - 1.0).abs() < 1e-5 && rep_.pass, "{rep_:?}");
        }
    }

    #[test]
    fn theorem_1d_ground_state_p2() {
        let rep = build_harmonic_rep::<f64>(1, 32, 1.0).unwrap();
        let rho = states::ground(&rep).unwrap();
        let r = check_theorem_1d(&rho, &rep, 2.0).unwrap();
        let c = (8.0 * PI).powf(-0.25) + PI.powf(-0.25);
        let rhs = 1.0 / (8.0 * PI * c.powi(4));
        assert!((r.lhs - 0.5).abs() < 1e-12);
        assert!((r.rhs - rhs).abs() < 1e-14);
        assert!((r.ratio - 25.87).abs() / 25.87 < 1e-3);
        let scaled = theorem_1d_ratio_scaled(&rho, &rep, 2.0).unwrap();
        assert!((scaled - r.ratio).abs() < 1e-12 * r.ratio);
        assert!(check_theorem_1d(&rho, &rep, 1.0).is_err());
    }

    #[test]
    fn theorem_1d_thermal_sweep() {
        for hbar in [1.0, 0.1] {
            let rep = build_harmonic_rep::<f64>(1, 48, hbar).unwrap();
            let rho = states::thermal(&rep, 0.4).unwrap();
            for p in [1.5, 3.0] {
                let r = check_theorem_1d(&rho, &rep, p).unwrap();
                assert!(r.pass, "{r:?}");
                let s = theorem_1d_ratio_scaled(&rho, &rep, p).unwrap();
                assert!((s - r.ratio).abs() < 1e-12 * r.ratio);
            }
        }
    }

    #[test]
    fn fourier_sandwich_bounds() {
        let rep = build_harmonic_rep::<f64>(1, 32, 1.0).unwrap();
        let rho = states::random_low_level(&rep, 12, 3, 7).unwrap();
        let mut xis = logspace(1e-3, 10.0, 25);
        xis.push(1e-4);
        for p in [1.5, 2.0, 3.0] {
            let s = fourier_sandwich(&rho, &rep, p, &xis, 1e-3).unwrap();
            assert!(s.upper.pass, "{:?}", s.upper);
            assert!(s.lower.pass, "{:?}", s.lower);
        }
        assert!(fourier_sandwich(&rho, &rep, 2.0, &[], 1e-3).is_err());
    }

    #[test]
    fn fourier_sandwich_degenerate_x_diagonal() {
        let rep = build_harmonic_rep::<f64>(1, 8, 1.0).unwrap();
        let spec = rep.x_spectrum(0);
        let w: Vec<f64> = (0..8).map(|k| if k < 2 { 0.5 } else { 0.0 }).collect();
        let diag = crate::scalar::CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(8, w.iter().map(|&v| cr(v))));
        let rho = DensityOperator::from_matrix(spec.from_eigenbasis(&diag)).unwrap();
        let s = fourier_sandwich(&rho, &rep, 2.0, &[0.01, 1.0], 1e-3).unwrap();
        assert!(s.upper.pass && s.lower.pass);
        assert_eq!(s.upper.ratio, 1.0);
    }

    #[test]
    fn operator_lipschitz_cases() {
        let rep = build_harmonic_rep::<f64>(1, 32, 1.0).unwrap();
        let rho = states::random_low_level(&rep, 10, 2, 11).unwrap();
        let lin = check_operator_lipschitz(&rho, &rep, LipschitzFunction::Linear { slope: 0.7 }, 2.0).unwrap();
        assert!((lin.ratio - 1.0).abs() < 1e-10);
        let cst = check_operator_lipschitz(&rho, &rep, LipschitzFunction::Constant { value: 2.0 }, 2.0).unwrap();
        assert_eq!(cst.lhs, 0.0);
        let th = check_operator_lipschitz(&rho, &rep, LipschitzFunction::Tanh { scale: 1.0 }, 2.0).unwrap();
        assert!(th.ratio.is_finite() && th.ratio > 0.0 && th.kind == CheckKind::Statistic);
    }
}
