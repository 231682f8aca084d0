//! Empirical probes of open questions: counterexample search and
//! best-constant estimation over pinned ensembles.

mod ensembles;
mod estimates;
mod nelder_mead;
mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ensembles::{
    envelope, EnsembleGrid, OperatorPair, PairEnsemble, SampleId, StateChoice, SymbolEnsemble, SymbolTerm, TrigSymbol,
    WeylOperators, MAX_SYMBOL_MODES,
};
pub use estimates::{
    check_quantum_holder, check_weak_holder, conjecture_31_ratio, estimate_conjecture_31, estimate_quantum_holder,
    estimate_weak_holder, reevaluate_conjecture_31, reevaluate_quantum_holder, reevaluate_weak_holder, Conjecture31Ratio,
};
pub use nelder_mead::{nelder_mead, Minimum};
pub use search::{
    check_witness, search_skew_violation, search_skew_violation_with, skew_violation_ratio, SearchRecord, SearchResult,
    WitnessCheck, WitnessRecord, DEFAULT_RESTARTS, SUCCESS_MARGIN,
};

/// Minimizer of `λ ↦ λ^e a + λ^{−e} b` over `λ > 0`: `λ* = (b/a)^{1/(2e)}`, value `2√(ab)`.
pub fn optimize_scaling(a: f64, b: f64, exponent: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && exponent > 0.0) || !(a.is_finite() && b.is_finite() && exponent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scaling optimization needs positive finite a, b, exponent; got ({a}, {b}, {exponent})"
        )));
    }
    Ok(((b / a).powf(0.5 / exponent), 2.0 * (a * b).sqrt()))
}

/// The 0.5, 0.9 and 0.99 quantiles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
}

impl Quantiles {
    /// Linear interpolation between order statistics; zeros for an empty sample.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self { q50: quantile_sorted(&v, 0.5), q90: quantile_sorted(&v, 0.9), q99: quantile_sorted(&v, 0.99) }
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Statistics for one `(ħ, N)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub hbar: f64,
    pub n: usize,
    pub count: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub quantiles: Quantiles,
    pub max_edge_mass: f64,
}

/// One evaluated sample; `ratio` is `None` for degenerate (skipped) samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub id: SampleId,
    pub ratio: Option<f64>,
    pub edge_mass: f64,
}

/// Ratio statistics over an ensemble; `max_ratio` is an empirical lower bound
/// for the reciprocal of the best constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstant {
    pub name: String,
    pub ensemble_spec: String,
    pub sample_count: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub quantiles: Quantiles,
    pub breakdown: Vec<CellStats>,
    pub argmax: Option<SampleId>,
}

impl EmpiricalConstant {
    pub fn from_outcomes(name: &str, ensemble_spec: &str, outcomes: &[SampleOutcome]) -> Self {
        let ratios: Vec<f64> = outcomes.iter().filter_map(|o| o.ratio).collect();
        let argmax = outcomes
            .iter()
            .filter_map(|o| o.ratio.map(|r| (o.id, r)))
            .fold(None::<(SampleId, f64)>, |best, (id, r)| match best {
                Some((_, b)) if b >= r => best,
                _ => Some((id, r)),
            });
        let mut cells: Vec<CellStats> = Vec::new();
        for o in outcomes {
            let pos = cells.iter().position(|c| c.hbar == o.id.hbar && c.n == o.id.n);
            let cell = match pos {
                Some(i) => &mut cells[i],
                None => {
                    cells.push(CellStats {
                        hbar: o.id.hbar,
                        n: o.id.n,
                        count: 0,
                        skipped: 0,
                        max_ratio: 0.0,
                        quantiles: Quantiles::default(),
                        max_edge_mass: 0.0,
                    });
                    cells.last_mut().expect("just pushed")
                }
            };
            cell.max_edge_mass = cell.max_edge_mass.max(o.edge_mass);
            match o.ratio {
                Some(r) => {
                    cell.count += 1;
                    cell.max_ratio = cell.max_ratio.max(r);
                }
                None => cell.skipped += 1,
            }
        }
        for cell in &mut cells {
            let rs: Vec<f64> = outcomes
                .iter()
                .filter(|o| o.id.hbar == cell.hbar && o.id.n == cell.n)
                .filter_map(|o| o.ratio)
                .collect();
            cell.quantiles = Quantiles::of(&rs);
        }
        Self {
            name: name.to_string(),
            ensemble_spec: ensemble_spec.to_string(),
            sample_count: ratios.len(),
            skipped: outcomes.len() - ratios.len(),
            max_ratio: argmax.map_or(0.0, |(_, r)| r),
            quantiles: Quantiles::of(&ratios),
            breakdown: cells,
            argmax: argmax.map(|(id, _)| id),
        }
    }

    pub fn cell(&self, hbar: f64, n: usize) -> Option<&CellStats> {
        self.breakdown.iter().find(|c| c.hbar == hbar && c.n == n)
    }

    /// Largest relative change of the cell maximum and median between two basis sizes at one ħ.
    pub fn refinement_change(&self, hbar: f64, n_coarse: usize, n_fine: usize) -> Option<f64> {
        let c = self.cell(hbar, n_coarse)?;
        let f = self.cell(hbar, n_fine)?;
        let rel = |a: f64, b: f64| if b != 0.0 { ((a - b) / b).abs() } else { (a - b).abs() };
        Some(rel(c.max_ratio, f.max_ratio).max(rel(c.quantiles.q50, f.quantiles.q50)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("EmpiricalConstant serializes")
    }

    /// CSV of the per-cell breakdown.
    pub fn breakdown_csv(&self) -> String {
        let mut out = String::from(BREAKDOWN_CSV_HEADER);
        out.push('\n');
        for c in &self.breakdown {
            out.push_str(&format!(
                "{},{},{},{},{:e},{:e},{:e},{:e},{:e}\n",
                c.hbar, c.n, c.count, c.skipped, c.max_ratio, c.quantiles.q50, c.quantiles.q90, c.quantiles.q99, c.max_edge_mass
            ));
        }
        out
    }
}

pub const BREAKDOWN_CSV_HEADER: &str = "hbar,N,count,skipped,max_ratio,q50,q90,q99,max_edge_mass";
