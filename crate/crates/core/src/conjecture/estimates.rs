//! Ratio functionals and ensemble drivers for the conjectured constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensembles::{PairEnsemble, SampleId, SymbolEnsemble, WeylOperators};
use super::{EmpiricalConstant, SampleOutcome};
use crate::error::{Error, Result};
use crate::inequality::ZERO_FLOOR;
use crate::operator::{
    commutator, frobenius_norm, scaled_schatten_norm, DensityOperator, HermitianOperator, SchattenExponent,
};
use crate::phase_space::{build_harmonic_rep, iterated_gradient_norm, quantum_gradient, PhaseSpaceRep, MAX_GRADIENT_ORDER};
use crate::report::{InputsDigest, RatioReport};
use crate::scalar::{CMatrix, Real};

/// Both sides of `C ‖|[A,B]|^{1/2} ρ‖²₂ ≤ ‖[A,√ρ]‖₂ ‖[B,√ρ]‖₂` with `C = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conjecture31Ratio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `Tr(|[A,B]|ρ²) / √(I_A I_B)`, equal to `2·ratio`.
    pub trace_form_ratio: f64,
}

/// `None` when either side vanishes. The `ℏ`-scaled norms carry the same power of
/// `h` on both sides, so unscaled norms are used.
pub fn conjecture_31_ratio<T: Real>(
    rho: &DensityOperator<T>,
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<Option<Conjecture31Ratio>> {
    let c = commutator(a.matrix(), b.matrix())?;
    // [A,B] is anti-Hermitian, so |[A,B]| = |i[A,B]| comes from a Hermitian eigendecomposition.
    let ic = HermitianOperator::from_hermitian_part(c * crate::scalar::c::<T>(0.0, 1.0));
    let abs_c = ic.apply_function(|l| l.abs());
    let root_abs_c = ic.apply_function(|l| l.abs().sqrt());
    let lhs = frobenius_norm(&(root_abs_c.matrix() * rho.matrix())).as_f64().powi(2);
    let trace_form = (abs_c.matrix() * rho.matrix() * rho.matrix()).trace().re.as_f64();
    let sqrt_rho = rho.sqrt();
    let ca = frobenius_norm(&commutator(a.matrix(), sqrt_rho.matrix())?).as_f64();
    let cb = frobenius_norm(&commutator(b.matrix(), sqrt_rho.matrix())?).as_f64();
    let rhs = ca * cb;
    if rhs <= 0.0 || lhs <= ZERO_FLOOR * rhs {
        return Ok(None);
    }
    // I_K = ½‖[K,√ρ]‖₂².
    let skew_geo = 0.5 * rhs;
    Ok(Some(Conjecture31Ratio { lhs, rhs, ratio: lhs / rhs, trace_form_ratio: trace_form / skew_geo }))
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent must lie in (1, ∞), got {p}")))
    }
}

/// `‖[A,B]‖_{ℒᵖ} / (ħ ‖∇ₕA‖_{ℒq} ‖∇ₕB‖_{ℒr})` with `1/p = 1/q + 1/r`.
pub fn check_quantum_holder<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    rep: &PhaseSpaceRep<T>,
    p: f64,
    q: f64,
    r: f64,
) -> Result<RatioReport> {
    for e in [p, q, r] {
        check_exponent(e)?;
    }
    if (1.0 / p - 1.0 / q - 1.0 / r).abs() > 1e-12 {
        return Err(Error::ExponentMismatch { p, q, r });
    }
    rep.check_dim(a.matrix())?;
    rep.check_dim(b.matrix())?;
    let (hbar, d) = (rep.hbar(), rep.d());
    let e = |x: f64| SchattenExponent::from_f64(x);
    let num = scaled_schatten_norm(&commutator(a.matrix(), b.matrix())?, e(p)?, hbar, d)?.as_f64();
    let ga = quantum_gradient(a.matrix(), rep)?.scaled_norm(e(q)?, rep).as_f64();
    let gb = quantum_gradient(b.matrix(), rep)?.scaled_norm(e(r)?, rep).as_f64();
    let den = hbar.as_f64() * ga * gb;
    let num = if num <= ZERO_FLOOR * den.max(1.0) { 0.0 } else { num };
    let digest = InputsDigest::new()
        .label("quantum_holder")
        .matrix(a.matrix())
        .matrix(b.matrix())
        .scalar(T::lit(p))
        .scalar(T::lit(q))
        .scalar(T::lit(r))
        .finish();
    Ok(RatioReport::statistic("quantum_holder", num, den)
        .with_digest(digest)
        .with_edge_mass(relative_edge_mass(rep, &[a.matrix(), b.matrix()])))
}

/// `‖[A,B]‖_{ℒᵖ} / (‖∇ₕ^{n+1}A‖_{ℒ²}^{d/n} ‖∇ₕA‖_{ℒ²}^{1−d/n} ‖∇ₕB‖_{ℒᵖ})`; the constant
/// is unknown, so the report is a statistic whose batch maximum bounds it from below.
pub fn check_weak_holder<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    rep: &PhaseSpaceRep<T>,
    n: usize,
    p: f64,
) -> Result<RatioReport> {
    check_exponent(p)?;
    let d = rep.d();
    if n <= d || n + 1 > MAX_GRADIENT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "gradient order n must satisfy {d} < n ≤ {}, got {n}",
            MAX_GRADIENT_ORDER - 1
        )));
    }
    rep.check_dim(a.matrix())?;
    rep.check_dim(b.matrix())?;
    let hbar = rep.hbar();
    let two = SchattenExponent::from_f64(2.0)?;
    let pe = SchattenExponent::from_f64(p)?;
    let h = rep.planck().as_f64();
    let l2_scale = h.powf(d as f64 / 2.0);
    let num = scaled_schatten_norm(&commutator(a.matrix(), b.matrix())?, pe, hbar, d)?.as_f64();
    let high = l2_scale * iterated_gradient_norm(a.matrix(), rep, n + 1, two)?.as_f64();
    let low = l2_scale * iterated_gradient_norm(a.matrix(), rep, 1, two)?.as_f64();
    let gb = quantum_gradient(b.matrix(), rep)?.scaled_norm(pe, rep).as_f64();
    let theta = d as f64 / n as f64;
    let den = high.powf(theta) * low.powf(1.0 - theta) * gb;
    let num = if num <= ZERO_FLOOR * den.max(1.0) { 0.0 } else { num };
    let digest = InputsDigest::new()
        .label("weak_holder")
        .matrix(a.matrix())
        .matrix(b.matrix())
        .scalar(T::count(n))
        .scalar(T::lit(p))
        .finish();
    Ok(RatioReport::statistic("weak_holder", num, den)
        .with_digest(digest)
        .with_edge_mass(relative_edge_mass(rep, &[a.matrix(), b.matrix()])))
}

fn relative_edge_mass<T: Real>(rep: &PhaseSpaceRep<T>, ms: &[&CMatrix<T>]) -> f64 {
    ms.iter()
        .map(|m| {
            let total = frobenius_norm(m).as_f64().powi(2);
            if total > 0.0 { rep.edge_mass(m).as_f64() / total } else { 0.0 }
        })
        .fold(0.0, f64::max)
}

fn usable(report: &RatioReport) -> Option<f64> {
    (report.lhs > 0.0 && report.rhs > 0.0 && report.ratio.is_finite()).then_some(report.ratio)
}

struct Cell<T: Real> {
    hbar_index: usize,
    n: usize,
    rep: PhaseSpaceRep<T>,
    weyl: Option<WeylOperators<T>>,
}

fn build_cells<T: Real>(hbars: &[f64], levels: &[usize], with_weyl: bool) -> Result<Vec<Cell<T>>> {
    let mut cells = Vec::new();
    for (hbar_index, &hbar) in hbars.iter().enumerate() {
        for &n in levels {
            let rep = build_harmonic_rep(1, n, T::lit(hbar))?;
            let weyl = if with_weyl { Some(WeylOperators::new(n, T::lit(hbar))?) } else { None };
            cells.push(Cell { hbar_index, n, rep, weyl });
        }
    }
    Ok(cells)
}

fn run<T: Real>(
    ids: &[SampleId],
    cells: &[Cell<T>],
    eval: impl Fn(&SampleId, &Cell<T>) -> Result<SampleOutcome> + Sync,
) -> Result<Vec<SampleOutcome>> {
    ids.par_iter()
        .map(|id| {
            let cell = cells
                .iter()
                .find(|c| c.hbar_index == id.hbar_index && c.n == id.n)
                .expect("cell exists for every id");
            eval(id, cell)
        })
        .collect()
}

fn pair_outcome<T: Real>(ens: &PairEnsemble, id: &SampleId, rep: &PhaseSpaceRep<T>) -> Result<SampleOutcome> {
    let (pair, state) = ens.draw(id);
    let (a, b) = pair.quantize(rep);
    let rho = state.build(rep)?;
    let ratio = conjecture_31_ratio(&rho, &a, &b)?.map(|r| r.ratio);
    Ok(SampleOutcome { id: *id, ratio, edge_mass: rep.edge_mass(rho.matrix()).as_f64() })
}

/// Ratio statistics for `‖|[A,B]|^{1/2}ρ‖²₂ / (‖[A,√ρ]‖₂‖[B,√ρ]‖₂)` over one-dimensional pair ensembles.
pub fn estimate_conjecture_31<T: Real>(ens: &PairEnsemble) -> Result<EmpiricalConstant> {
    ens.grid.validate()?;
    let cells = build_cells::<T>(&ens.grid.hbars, &ens.grid.levels, false)?;
    let outcomes = run(&ens.grid.ids(), &cells, |id, cell| pair_outcome(ens, id, &cell.rep))?;
    Ok(EmpiricalConstant::from_outcomes("conjecture_31", &ens.describe(), &outcomes))
}

pub fn reevaluate_conjecture_31<T: Real>(ens: &PairEnsemble, id: &SampleId) -> Result<Option<f64>> {
    let rep = build_harmonic_rep(1, id.n, T::lit(id.hbar))?;
    Ok(pair_outcome(ens, id, &rep)?.ratio)
}

fn symbol_outcome<T: Real>(
    ens: &SymbolEnsemble,
    id: &SampleId,
    rep: &PhaseSpaceRep<T>,
    weyl: &WeylOperators<T>,
    check: &(impl Fn(&HermitianOperator<T>, &HermitianOperator<T>, &PhaseSpaceRep<T>) -> Result<RatioReport> + Sync),
) -> Result<SampleOutcome> {
    let (a, b) = ens.sample(id, weyl);
    let report = check(&a, &b, rep)?;
    Ok(SampleOutcome { id: *id, ratio: usable(&report), edge_mass: report.truncation_edge_mass })
}

fn estimate_symbols<T: Real>(
    name: &str,
    ens: &SymbolEnsemble,
    check: impl Fn(&HermitianOperator<T>, &HermitianOperator<T>, &PhaseSpaceRep<T>) -> Result<RatioReport> + Sync,
) -> Result<EmpiricalConstant> {
    ens.validate()?;
    let cells = build_cells::<T>(&ens.grid.hbars, &ens.grid.levels, true)?;
    let outcomes = run(&ens.grid.ids(), &cells, |id, cell| {
        symbol_outcome(ens, id, &cell.rep, cell.weyl.as_ref().expect("weyl cache"), &check)
    })?;
    Ok(EmpiricalConstant::from_outcomes(name, &ens.describe(), &outcomes))
}

fn reevaluate_symbols<T: Real>(
    ens: &SymbolEnsemble,
    id: &SampleId,
    check: impl Fn(&HermitianOperator<T>, &HermitianOperator<T>, &PhaseSpaceRep<T>) -> Result<RatioReport> + Sync,
) -> Result<Option<f64>> {
    let rep = build_harmonic_rep(1, id.n, T::lit(id.hbar))?;
    let weyl = WeylOperators::new(id.n, T::lit(id.hbar))?;
    Ok(symbol_outcome(ens, id, &rep, &weyl, &check)?.ratio)
}

/// Ratio statistics for the quantum Hölder inequality over symbol ensembles.
pub fn estimate_quantum_holder<T: Real>(ens: &SymbolEnsemble, p: f64, q: f64, r: f64) -> Result<EmpiricalConstant> {
    if (1.0 / p - 1.0 / q - 1.0 / r).abs() > 1e-12 {
        return Err(Error::ExponentMismatch { p, q, r });
    }
    let mut e = estimate_symbols::<T>("quantum_holder", ens, |a, b, rep| check_quantum_holder(a, b, rep, p, q, r))?;
    e.ensemble_spec = format!("{};p={p};q={q};r={r}", e.ensemble_spec);
    Ok(e)
}

pub fn reevaluate_quantum_holder<T: Real>(ens: &SymbolEnsemble, id: &SampleId, p: f64, q: f64, r: f64) -> Result<Option<f64>> {
    reevaluate_symbols::<T>(ens, id, |a, b, rep| check_quantum_holder(a, b, rep, p, q, r))
}

/// Ratio statistics for the gradient-interpolation Hölder inequality over symbol ensembles.
pub fn estimate_weak_holder<T: Real>(ens: &SymbolEnsemble, n: usize, p: f64) -> Result<EmpiricalConstant> {
    let mut e = estimate_symbols::<T>("weak_holder", ens, |a, b, rep| check_weak_holder(a, b, rep, n, p))?;
    e.ensemble_spec = format!("{};n={n};p={p}", e.ensemble_spec);
    Ok(e)
}

pub fn reevaluate_weak_holder<T: Real>(ens: &SymbolEnsemble, id: &SampleId, n: usize, p: f64) -> Result<Option<f64>> {
    reevaluate_symbols::<T>(ens, id, |a, b, rep| check_weak_holder(a, b, rep, n, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjecture::EnsembleGrid;
    use crate::inequality::{check_operator_lipschitz, LipschitzFunction};
    use crate::inequality::one_d_constant;
    use crate::info::{skew_information, SkewMethod};
    use crate::phase_space::states;

    fn symbols(hbars: Vec<f64>, levels: Vec<usize>, samples: usize) -> SymbolEnsemble {
        SymbolEnsemble {
            grid: EnsembleGrid { hbars, levels, samples, seed: 2024 },
            modes: 2,
            base_frequency: 1.0,
            envelope_width: 0.6,
        }
    }

    #[test]
    fn canonical_pair_ratio_is_bounded_by_the_proved_constant() {
        let rep = build_harmonic_rep::<f64>(1, 40, 1.0).unwrap();
        let (x, p) = (rep.x(0).clone(), rep.p(0).clone());
        let bound = 4.0 * std::f64::consts::PI * one_d_constant(0.5).unwrap().powi(4);
        for rho in [states::ground(&rep).unwrap(), states::thermal(&rep, 0.3).unwrap(), states::squeezed(&rep, 0.3).unwrap()] {
            let r = conjecture_31_ratio(&rho, &x, &p).unwrap().unwrap();
            // |[x,p]| = ħ away from the top level, so lhs = ħ‖ρ‖₂².
            assert!((r.lhs - rho.purity()).abs() < 1e-8, "{r:?}");
            assert!((r.trace_form_ratio - 2.0 * r.ratio).abs() < 1e-8 * r.ratio);
            let ix = skew_information(&rho, &x, SkewMethod::Commutator).unwrap();
            let ip = skew_information(&rho, &p, SkewMethod::Commutator).unwrap();
            assert!((r.rhs - 2.0 * (ix * ip).sqrt()).abs() < 1e-9 * r.rhs);
            assert!(r.ratio <= bound, "{} > {bound}", r.ratio);
        }
    }

    #[test]
    fn equal_observables_are_skipped() {
        let rep = build_harmonic_rep::<f64>(1, 12, 1.0).unwrap();
        let rho = states::thermal(&rep, 0.2).unwrap();
        assert!(conjecture_31_ratio(&rho, rep.x(0), rep.x(0)).unwrap().is_none());
        let r = check_quantum_holder(rep.x(0), rep.x(0), &rep, 2.0, 4.0, 4.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(usable(&r).is_none());
    }

    #[test]
    fn pair_ensemble_statistics_reverify() {
        let ens = PairEnsemble { grid: EnsembleGrid { hbars: vec![1.0, 0.5, 0.1], levels: vec![24], samples: 20, seed: 9 } };
        let e = estimate_conjecture_31::<f64>(&ens).unwrap();
        assert_eq!(e.breakdown.len(), 3);
        assert!(e.max_ratio >= e.quantiles.q99 && e.max_ratio.is_finite());
        let id = e.argmax.unwrap();
        let again = reevaluate_conjecture_31::<f64>(&ens, &id).unwrap().unwrap();
        assert!((again - e.max_ratio).abs() <= 1e-10 * e.max_ratio);
    }

    #[test]
    fn holder_rejects_mismatched_exponents() {
        let rep = build_harmonic_rep::<f64>(1, 8, 1.0).unwrap();
        assert!(matches!(
            check_quantum_holder(rep.x(0), rep.p(0), &rep, 2.0, 3.0, 3.0),
            Err(Error::ExponentMismatch { .. })
        ));
        assert!(estimate_quantum_holder::<f64>(&symbols(vec![1.0], vec![8], 1), 2.0, 3.0, 3.0).is_err());
    }

    #[test]
    fn holder_numerator_matches_lipschitz_module() {
        let rep = build_harmonic_rep::<f64>(1, 24, 0.5).unwrap();
        let rho = states::thermal(&rep, 0.2).unwrap();
        let p = 2.0;
        let lip = check_operator_lipschitz(&rho, &rep, LipschitzFunction::Linear { slope: 1.0 }, p).unwrap();
        let holder = check_quantum_holder(rep.x(0), rho.as_hermitian(), &rep, p, 4.0, 4.0).unwrap();
        let scale = rep.planck().powf(1.0 / p);
        assert!((holder.lhs / scale - lip.lhs).abs() <= 1e-8 * lip.lhs);
    }

    #[test]
    fn holder_ensemble_table_and_reverification() {
        let ens = symbols(vec![1.0, 0.25], vec![16, 32], 6);
        let e = estimate_quantum_holder::<f64>(&ens, 2.0, 4.0, 4.0).unwrap();
        assert_eq!(e.breakdown.len(), 4);
        assert_eq!(e.sample_count + e.skipped, 24);
        let id = e.argmax.unwrap();
        let again = reevaluate_quantum_holder::<f64>(&ens, &id, 2.0, 4.0, 4.0).unwrap().unwrap();
        assert!((again - e.max_ratio).abs() <= 1e-10 * e.max_ratio);
    }

    #[test]
    fn weak_holder_is_homogeneous_and_refines() {
        let rep = build_harmonic_rep::<f64>(1, 16, 1.0).unwrap();
        let ens = symbols(vec![1.0], vec![16], 1);
        let weyl = WeylOperators::new(16, 1.0).unwrap();
        let (a, b) = ens.sample(&ens.grid.ids()[0], &weyl);
        let r = check_weak_holder(&a, &b, &rep, 2, 2.0).unwrap();
        let r3 = check_weak_holder(&a.scaled(3.0), &b, &rep, 2, 2.0).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        assert!((r3.ratio - r.ratio).abs() <= 1e-9 * r.ratio);
        assert!(check_weak_holder(&a, &b, &rep, 1, 2.0).is_err());
        assert!(check_weak_holder(&a, &b, &rep, 4, 2.0).is_err());
        let id = HermitianOperator::<f64>::identity(16);
        let degenerate = check_weak_holder(&id, &b, &rep, 2, 2.0).unwrap();
        assert!(usable(&degenerate).is_none());

        let ens = symbols(vec![1.0], vec![16, 32], 4);
        let e = estimate_weak_holder::<f64>(&ens, 2, 2.0).unwrap();
        let change = e.refinement_change(1.0, 16, 32).unwrap();
        assert!(change < 0.1, "{change}");
    }
}
