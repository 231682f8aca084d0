//! Variance, skew information and SLD Fisher information of an observable.
//!
//! Skew information and SLD Fisher information are each computed along two
//! independent routes so callers can cross-check them.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{commutator, frobenius_norm, trace_product, DensityOperator, HermitianOperator};
use crate::scalar::{abs2, CMatrix, Real};

/// Default eigenvalue cutoff defining the support of `ρ`.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkewMethod {
    Commutator,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherMethod {
    Direct,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Variance,
    Skew,
    Sld,
}

fn check_pair<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<()> {
    if rho.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: k.dim() });
    }
    Ok(())
}

/// `Tr((K − ⟨K⟩)² ρ)`, clamped at zero.
pub fn variance<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<T> {
    check_pair(rho, k)?;
    let mean = trace_product(k.matrix(), rho.matrix()).re;
    let centered = k.shifted(-mean);
    let sq = centered.matrix() * centered.matrix();
    Ok(trace_product(&sq, rho.matrix()).re.max(T::zero()))
}

/// Skew information `½ Tr([K, √ρ]* [K, √ρ])`.
pub fn skew_information<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>, method: SkewMethod) -> Result<T> {
    check_pair(rho, k)?;
    let half = T::lit(0.5);
    match method {
        SkewMethod::Commutator => {
            let c = commutator(k.matrix(), rho.sqrt().matrix())?;
            Ok(half * frobenius_norm(&c).powi(2))
        }
        SkewMethod::Spectral => {
            let lam = rho.clipped_eigenvalues();
            let kt = rho.spectrum().in_eigenbasis(k.matrix());
            let n = lam.len();
            let mut sum = T::zero();
            for j in 0..n {
                for l in 0..n {
                    let d = lam[j].sqrt() - lam[l].sqrt();
                    sum += d * d * abs2(kt[(j, l)]);
                }
            }
            Ok(half * sum)
        }
    }
}

/// Symmetric logarithmic derivative solving `½(Lρ + ρL) = (1/i)[K, ρ]` on the support of `ρ`.
#[derive(Clone, Debug)]
pub struct SldOperator<T: Real> {
    pub matrix: HermitianOperator<T>,
    pub support_projector_rank: usize,
    pub support_tol: T,
}

impl<T: Real> SldOperator<T> {
    /// `‖½(Lρ + ρL) − (1/i)[K, ρ]‖_F` restricted to the retained support.
    pub fn residual(&self, rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<T> {
        check_pair(rho, k)?;
        let spec = rho.spectrum();
        let lam = rho.clipped_eigenvalues();
        let l = self.matrix.matrix();
        let lhs = (l * rho.matrix() + rho.matrix() * l) * Complex::new(T::lit(0.5), T::zero());
        let rhs = commutator(k.matrix(), rho.matrix())? * Complex::new(T::zero(), -T::one());
        let mut diff = spec.in_eigenbasis(&(lhs - rhs));
        let n = lam.len();
        for j in 0..n {
            for m in 0..n {
                if lam[j] + lam[m] <= self.support_tol {
                    diff[(j, m)] = Complex::new(T::zero(), T::zero());
                }
            }
        }
        Ok(frobenius_norm(&diff))
    }
}

/// SLD with the default support cutoff.
pub fn sld_operator<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<SldOperator<T>> {
    sld_operator_with_tol(rho, k, T::lit(DEFAULT_SUPPORT_TOL))
}

/// In the eigenbasis of `ρ`: `L_jk = (2/i) K_jk (λ_k − λ_j)/(λ_j + λ_k)` when `λ_j + λ_k > tol`, else 0.
pub fn sld_operator_with_tol<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>, support_tol: T) -> Result<SldOperator<T>> {
    check_pair(rho, k)?;
    if !(support_tol >= T::zero()) {
        return Err(Error::InvalidArgument("support_tol must be non-negative".into()));
    }
    let spec = rho.spectrum();
    let lam = rho.clipped_eigenvalues();
    let kt = spec.in_eigenbasis(k.matrix());
    let n = lam.len();
    let minus_two_i = Complex::new(T::zero(), -T::lit(2.0));
    let mut lt = CMatrix::<T>::zeros(n, n);
    for j in 0..n {
        for m in 0..n {
            let s = lam[j] + lam[m];
            if s > support_tol {
                lt[(j, m)] = minus_two_i * kt[(j, m)] * ((lam[m] - lam[j]) / s);
            }
        }
    }
    let rank = lam.iter().filter(|&&l| l > support_tol).count();
    Ok(SldOperator {
        matrix: HermitianOperator::from_hermitian_part(spec.from_eigenbasis(&lt)),
        support_projector_rank: rank,
        support_tol,
    })
}

/// SLD Fisher information with the default support cutoff.
pub fn sld_fisher<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>, method: FisherMethod) -> Result<T> {
    sld_fisher_with_tol(rho, k, method, T::lit(DEFAULT_SUPPORT_TOL))
}

/// `Tr(L* L ρ)` (direct) or `2 Σ_{j,k} (λ_j − λ_k)²/(λ_j + λ_k) |K_jk|²` (spectral, ordered pairs).
pub fn sld_fisher_with_tol<T: Real>(
    rho: &DensityOperator<T>,
    k: &HermitianOperator<T>,
    method: FisherMethod,
    support_tol: T,
) -> Result<T> {
    check_pair(rho, k)?;
    match method {
        FisherMethod::Direct => {
            let l = sld_operator_with_tol(rho, k, support_tol)?;
            let lm = l.matrix.matrix();
            Ok(trace_product(&(lm.adjoint() * lm), rho.matrix()).re.max(T::zero()))
        }
        FisherMethod::Spectral => {
            let lam = rho.clipped_eigenvalues();
            let kt = rho.spectrum().in_eigenbasis(k.matrix());
            let n = lam.len();
            let mut sum = T::zero();
            for j in 0..n {
                for m in 0..n {
                    let s = lam[j] + lam[m];
                    if s > support_tol {
                        let d = lam[j] - lam[m];
                        sum += d * d / s * abs2(kt[(j, m)]);
                    }
                }
            }
            Ok(T::lit(2.0) * sum)
        }
    }
}

/// Sum of a scalar functional over a list of observables.
pub fn vector_information<T: Real>(rho: &DensityOperator<T>, ops: &[HermitianOperator<T>], functional: Functional) -> Result<T> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("observable list is empty".into()));
    }
    let mut total = T::zero();
    for k in ops {
        total += match functional {
            Functional::Variance => variance(rho, k)?,
            Functional::Skew => skew_information(rho, k, SkewMethod::Spectral)?,
            Functional::Sld => sld_fisher(rho, k, FisherMethod::Spectral)?,
        };
    }
    Ok(total)
}

/// All functionals for one `(ρ, K)` pair, both routes where available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub variance: f64,
    pub skew_commutator: f64,
    pub skew_spectral: f64,
    pub sld_fisher_direct: f64,
    pub sld_fisher_spectral: f64,
    pub support_cutoff_used: f64,
}

impl InfoReport {
    pub fn evaluate<T: Real>(rho: &DensityOperator<T>, k: &HermitianOperator<T>) -> Result<Self> {
        Ok(Self {
            variance: variance(rho, k)?.as_f64(),
            skew_commutator: skew_information(rho, k, SkewMethod::Commutator)?.as_f64(),
            skew_spectral: skew_information(rho, k, SkewMethod::Spectral)?.as_f64(),
            sld_fisher_direct: sld_fisher(rho, k, FisherMethod::Direct)?.as_f64(),
            sld_fisher_spectral: sld_fisher(rho, k, FisherMethod::Spectral)?.as_f64(),
            support_cutoff_used: DEFAULT_SUPPORT_TOL,
        })
    }

    /// `σ² − J/4`.
    pub fn slack_variance_fisher(&self) -> f64 {
        self.variance - self.sld_fisher_spectral / 4.0
    }

    /// `J/4 − I`.
    pub fn slack_fisher_skew(&self) -> f64 {
        self.sld_fisher_spectral / 4.0 - self.skew_spectral
    }

    pub fn skew_paths_agree(&self, rel: f64) -> bool {
        agree(self.skew_commutator, self.skew_spectral, rel)
    }

    pub fn fisher_paths_agree(&self, rel: f64) -> bool {
        agree(self.sld_fisher_direct, self.sld_fisher_spectral, rel)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("InfoReport serializes")
    }
}

fn agree(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// One row of a batch run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfoBatchRow {
    pub dim: usize,
    pub rank: usize,
    pub seed: u64,
    pub report: InfoReport,
}

pub const INFO_BATCH_HEADER: &str = "dim,rank,seed,sigma2,I,J,slack1,slack2";

impl InfoBatchRow {
    pub fn csv_line(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e}",
            self.dim,
            self.rank,
            self.seed,
            r.variance,
            r.skew_spectral,
            r.sld_fisher_spectral,
            r.slack_variance_fisher(),
            r.slack_fisher_skew()
        )
    }
}

pub fn info_batch_csv(rows: &[InfoBatchRow]) -> String {
    let mut out = String::from(INFO_BATCH_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, random_hermitian, random_unitary, sample_random_density, sample_random_pure, seeded_rng};
    use crate::scalar::c;
    use proptest::prelude::*;

    fn qubit() -> DensityOperator<f64> {
        DensityOperator::from_diagonal(&[0.75, 0.25]).unwrap()
    }

    fn sx() -> HermitianOperator<f64> {
        HermitianOperator::new(pauli::x()).unwrap()
    }

    #[test]
    fn qubit_variances() {
        let rho = qubit();
        assert!((variance(&rho, &sx()).unwrap() - 1.0).abs() < 1e-15);
        let sz = HermitianOperator::new(pauli::z()).unwrap();
        assert!((variance(&rho, &sz).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn qubit_skew_both_paths() {
        let expected = 1.0 - 3f64.sqrt() / 2.0;
        for m in [SkewMethod::Commutator, SkewMethod::Spectral] {
            assert!((skew_information(&qubit(), &sx(), m).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn qubit_sld_is_minus_pauli_y() {
        let l = sld_operator(&qubit(), &sx()).unwrap();
        let expected = pauli::y::<f64>() * c::<f64>(-1.0, 0.0);
        assert!((l.matrix.matrix() - expected).norm() < 1e-14);
        assert_eq!(l.support_projector_rank, 2);
        assert!(l.residual(&qubit(), &sx()).unwrap() < 1e-14);
        for m in [FisherMethod::Direct, FisherMethod::Spectral] {
            assert!((sld_fisher(&qubit(), &sx(), m).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pure_basis_state_sld_entries() {
        let mut rng = seeded_rng(3);
        let k = random_hermitian::<f64, _>(4, &mut rng);
        let rho = DensityOperator::from_diagonal(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        let l = sld_operator(&rho, &k).unwrap();
        let lm = l.matrix.matrix();
        let two_i = c::<f64>(0.0, 2.0);
        for m in 0..4 {
            if m != 1 {
                assert!((lm[(1, m)] - two_i * k.matrix()[(1, m)]).norm() < 1e-12);
            }
        }
        assert!(lm[(1, 1)].norm() < 1e-12);
        assert_eq!(l.support_projector_rank, 1);
    }

    #[test]
    fn commuting_observable_gives_zero() {
        let sz = HermitianOperator::new(pauli::z()).unwrap();
        assert!(skew_information(&qubit(), &sz, SkewMethod::Commutator).unwrap() < 1e-15);
        assert!(sld_fisher(&qubit(), &sz, FisherMethod::Direct).unwrap() < 1e-15);
        assert!(sld_operator(&qubit(), &sz).unwrap().matrix.matrix().norm() < 1e-15);
    }

    #[test]
    fn eigenvector_has_no_dispersion() {
        let rho = DensityOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let sz = HermitianOperator::new(pauli::z()).unwrap();
        assert!(variance(&rho, &sz).unwrap() < 1e-15);
    }

    #[test]
    fn vector_information_sums_components() {
        let ops = vec![sx()];
        let v = vector_information(&qubit(), &ops, Functional::Variance).unwrap();
        assert_eq!(v, variance(&qubit(), &sx()).unwrap());
        assert!(vector_information(&qubit(), &[], Functional::Skew).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let k = HermitianOperator::<f64>::identity(3);
        assert!(matches!(variance(&qubit(), &k), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn report_json_and_csv() {
        let r = InfoReport::evaluate(&qubit(), &sx()).unwrap();
        let back: InfoReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let csv = info_batch_csv(&[InfoBatchRow { dim: 2, rank: 2, seed: 0, report: r }]);
        assert!(csv.starts_with(INFO_BATCH_HEADER));
        assert_eq!(csv.lines().count(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn hierarchy_and_dual_paths(dim in 2usize..=16, rank_frac in 0.0f64..1.0, seed in any::<u64>()) {
            let rank = 1 + ((dim as f64 - 1.0) * rank_frac) as usize;
            let rho = sample_random_density::<f64>(dim, rank, seed).unwrap();
            let k = random_hermitian::<f64, _>(dim, &mut seeded_rng(seed ^ 0x5eed));
            let r = InfoReport::evaluate(&rho, &k).unwrap();
            prop_assert!(r.slack_variance_fisher() >= -1e-9);
            prop_assert!(r.slack_fisher_skew() >= -1e-9);
            prop_assert!(r.skew_paths_agree(1e-8));
            prop_assert!(r.fisher_paths_agree(1e-8));
        }

        #[test]
        fn pure_state_equalities(dim in 2usize..=16, seed in any::<u64>()) {
            let mut rng = seeded_rng(seed);
            let rho = sample_random_pure::<f64, _>(dim, &mut rng).unwrap();
            let k = random_hermitian::<f64, _>(dim, &mut rng);
            let r = InfoReport::evaluate(&rho, &k).unwrap();
            prop_assert!((r.variance - r.sld_fisher_spectral / 4.0).abs() <= 1e-9 * r.variance.max(1.0));
            prop_assert!((r.variance - r.skew_spectral).abs() <= 1e-9 * r.variance.max(1.0));
        }

        #[test]
        fn unitary_covariance_and_offset(dim in 2usize..=8, seed in any::<u64>(), shift in -3.0f64..3.0) {
            let mut rng = seeded_rng(seed);
            let rho = sample_random_density::<f64>(dim, dim, seed).unwrap();
            let k = random_hermitian::<f64, _>(dim, &mut rng);
            let u = random_unitary::<f64, _>(dim, &mut rng);
            let rho_u = rho.conjugated(&u).unwrap();
            let k_u = k.conjugated(&u);
            let a = InfoReport::evaluate(&rho, &k).unwrap();
            let b = InfoReport::evaluate(&rho_u, &k_u).unwrap();
            let scale = a.variance.max(1.0);
            prop_assert!((a.skew_spectral - b.skew_spectral).abs() <= 1e-9 * scale);
            prop_assert!((a.sld_fisher_spectral - b.sld_fisher_spectral).abs() <= 1e-9 * scale);
            prop_assert!((a.variance - b.variance).abs() <= 1e-9 * scale);
            let shifted = k.shifted(shift);
            let s = skew_information(&rho, &shifted, SkewMethod::Commutator).unwrap();
            prop_assert!((s - a.skew_commutator).abs() <= 1e-10 * scale);
        }
    }
}
