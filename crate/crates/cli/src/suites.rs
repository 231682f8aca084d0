//! The `verify` and `sweep` batteries.

use anyhow::{anyhow, Result};
use qskew_core::classical::{
    check_bracket_holder, check_change_of_variables, check_classical_sobolev_scaling, check_classical_uncertainty_1d,
    check_uncertainty_l1_steps, DiffeoFamily, DiffeoPair, GridDensity, GridField, UncertaintyConvention,
};
use qskew_core::conjecture::{
    estimate_conjecture_31, estimate_quantum_holder, estimate_weak_holder, reevaluate_conjecture_31,
    reevaluate_quantum_holder, reevaluate_weak_holder, EmpiricalConstant, EnsembleGrid, PairEnsemble, SampleId,
    SymbolEnsemble,
};
use qskew_core::inequality::{
    check_cramer_rao, check_heisenberg, check_hierarchy, check_operator_lipschitz, check_theorem_1d, check_theorem_d,
    fourier_sandwich, logspace, LipschitzFunction,
};
use qskew_core::info::{InfoBatchRow, InfoReport, info_batch_csv};
use qskew_core::operator::{random_hermitian, sample_random_density, substream_rng, DensityOperator};
use qskew_core::phase_space::{build_harmonic_rep, states, PhaseSpaceRep, WignerGrid};
use qskew_core::report::{CheckKind, RatioReport};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Family, RunConfig};
use crate::output::CellReports;

/// Lower-bound slack for the small-ξ Fourier samples.
const SANDWICH_LOWER_SLACK: f64 = 1e-3;
/// Agreement required when re-evaluating an argmax sample.
pub const REVERIFY_TOL: f64 = 1e-10;

fn cell(suite: &str, family: String, reports: Vec<RatioReport>) -> CellReports {
    CellReports { suite: suite.into(), family, reports }
}

fn cell_label(family: &Family, seed: u64, n: usize, hbar: f64, stochastic_seed: bool) -> String {
    if stochastic_seed {
        format!("{}_seed{seed}_N{n}_hbar{hbar}", family.label())
    } else {
        format!("{}_N{n}_hbar{hbar}", family.label())
    }
}

/// `(family, seed)` pairs; deterministic families use only the first seed.
fn family_seeds(cfg: &RunConfig) -> Vec<(Family, u64, bool)> {
    let mut out = Vec::new();
    for f in &cfg.families {
        if f.is_stochastic() {
            out.extend(cfg.seeds.iter().map(|&s| (f.clone(), s, cfg.seeds.len() > 1)));
        } else {
            out.push((f.clone(), cfg.seeds[0], false));
        }
    }
    out
}

fn one_d_cells(
    cfg: &RunConfig,
    label: String,
    rho: &DensityOperator<f64>,
    rep: &PhaseSpaceRep<f64>,
    statistics: bool,
) -> Result<Vec<CellReports>> {
    let (x, p) = (rep.x(0), rep.p(0));
    let mut cells = Vec::new();
    cells.push(cell("heisenberg", label.clone(), vec![check_heisenberg(rho, x, p)?]));
    let mut h = check_hierarchy(rho, x)?.to_vec();
    h.extend(check_hierarchy(rho, p)?);
    cells.push(cell("hierarchy", label.clone(), h));
    cells.push(cell("cramer-rao", label.clone(), check_cramer_rao(rho, x, p)?.to_vec()));
    let t1 = cfg.p_grid.iter().map(|&q| check_theorem_1d(rho, rep, q)).collect::<qskew_core::Result<Vec<_>>>()?;
    cells.push(cell("theorem-1d", label.clone(), t1));
    let xi = logspace(1e-4, 1.0, 16);
    let mut sw = Vec::new();
    for &q in &cfg.p_grid {
        let r = fourier_sandwich(rho, rep, q, &xi, SANDWICH_LOWER_SLACK)?;
        sw.push(r.upper);
        sw.push(r.lower);
    }
    cells.push(cell("sandwich", label.clone(), sw));
    if statistics {
        let lip = [LipschitzFunction::Tanh { scale: 1.0 }, LipschitzFunction::Sin { frequency: 1.0 }]
            .into_iter()
            .map(|u| check_operator_lipschitz(rho, rep, u, 2.0))
            .collect::<qskew_core::Result<Vec<_>>>()?;
        cells.push(cell("lipschitz", label, lip));
    }
    Ok(cells)
}

fn theorem_d_cell(cfg: &RunConfig, family: &Family, seed: u64, hbar: f64, label: String) -> Result<CellReports> {
    let n = cfg.levels_2d;
    let axis = build_harmonic_rep::<f64>(1, n, hbar)?;
    let a = family.build(&axis, seed)?;
    let b = family.build(&axis, seed.wrapping_add(1))?;
    let rho = states::product(&[a, b])?;
    let rep = build_harmonic_rep::<f64>(2, n, hbar)?;
    Ok(cell("theorem-d", label, vec![check_theorem_d(&rho, &rep)?]))
}

type RandomPair = (usize, u64, DensityOperator<f64>, qskew_core::Hermitian64);

/// Random `(ρ, K)` pairs for one dimension and seed; `(rank, sample seed, ρ, K)`.
fn random_pairs(dim: usize, seed: u64, samples: usize) -> Result<Vec<RandomPair>> {
    (0..samples)
        .map(|s| {
            let mut rng = substream_rng(seed, ((dim as u64) << 32) | s as u64);
            let rank = rng.random_range(1..=dim);
            let sample_seed: u64 = rng.random();
            let rho = sample_random_density::<f64>(dim, rank, sample_seed)?;
            let k = random_hermitian::<f64, _>(dim, &mut rng);
            Ok((rank, sample_seed, rho, k))
        })
        .collect()
}

fn random_hierarchy_cell(dim: usize, seed: u64, samples: usize) -> Result<CellReports> {
    let mut reports = Vec::new();
    for (_, _, rho, k) in random_pairs(dim, seed, samples)? {
        reports.extend(check_hierarchy(&rho, &k)?);
    }
    Ok(cell("hierarchy-random", format!("dim{dim}_seed{seed}"), reports))
}

fn grid(n: usize) -> Result<WignerGrid<f64>> {
    Ok(WignerGrid::symmetric(12.0, n, 12.0, n)?)
}

fn classical_uncertainty_cell(name: &str, f: GridDensity<f64>, family: DiffeoFamily, p_grid: &[f64]) -> Result<CellReports> {
    let pair = DiffeoPair::sample(family, f.field.grid)?;
    // The printed constant is recorded as a statistic; the corrected one is asserted.
    let stated = check_classical_uncertainty_1d(&f, &pair, UncertaintyConvention::AsStated)?.with_kind(CheckKind::Statistic);
    let corrected = check_classical_uncertainty_1d(&f, &pair, UncertaintyConvention::ChainRuleCorrected)?;
    let mut reports = vec![stated, corrected];
    reports.extend(check_uncertainty_l1_steps(&f, &pair)?);
    for &p in p_grid {
        reports.push(check_classical_sobolev_scaling(&f, p)?);
    }
    Ok(cell("classical", name.into(), reports))
}

fn classical_cells(cfg: &RunConfig) -> Result<Vec<CellReports>> {
    let g = grid(128)?;
    let mut cells = vec![
        classical_uncertainty_cell("gaussian-rotation", GridDensity::gaussian(g, 1.2, 1.2)?, DiffeoFamily::Rotation { theta: 0.4 }, &cfg.p_grid)?,
        classical_uncertainty_cell("gaussian-shear", GridDensity::gaussian(g, 1.0, 0.8)?, DiffeoFamily::Shear { c: 0.5 }, &cfg.p_grid)?,
    ];
    let w2 = 2.25;
    let bump = move |x: f64, v: f64| (-(x * x + v * v) / (2.0 * w2)).exp();
    let a = GridField::from_fn(g, |x, v| x * bump(x, v));
    let b = GridField::from_fn(g, |x, v| v * bump(x, v));
    let h = check_bracket_holder(&a, &b, 1.0, 2.0, 2.0)?;
    cells.push(cell("classical", "bracket-holder".into(), vec![h.holder, h.gradient_form, h.product_form]));
    let f = |x: f64, v: f64| (-(x * x) / 2.0 - v * v / 0.5).exp();
    let mut cov = Vec::new();
    for q in [1.0, 2.0, 3.0] {
        cov.push(check_change_of_variables(g, DiffeoFamily::Rotation { theta: 0.9 }, f, q, 1e-10)?);
    }
    let wide = WignerGrid::symmetric(40.0, 1024, 12.0, 128)?;
    cov.push(check_change_of_variables(wide, DiffeoFamily::Cubic { c: 0.2 }, f, 2.0, 1e-6)?);
    cells.push(cell("classical", "change-of-variables".into(), cov));
    Ok(cells)
}

enum Job {
    OneD { family: Family, seed: u64, n: usize, hbar: f64, label: String },
    TwoD { family: Family, seed: u64, hbar: f64, label: String },
    RandomHierarchy { dim: usize, seed: u64 },
    Classical,
}

fn run_jobs(cfg: &RunConfig, jobs: Vec<Job>, statistics: bool, theorem_only: bool) -> Result<Vec<CellReports>> {
    let nested: Vec<Vec<CellReports>> = jobs
        .into_par_iter()
        .map(|job| -> Result<Vec<CellReports>> {
            match job {
                Job::OneD { family, seed, n, hbar, label } => {
                    let rep = build_harmonic_rep::<f64>(1, n, hbar)?;
                    let rho = family.build(&rep, seed)?;
                    let cells = one_d_cells(cfg, label, &rho, &rep, statistics)?;
                    Ok(if theorem_only { cells.into_iter().filter(|c| c.suite == "theorem-1d").collect() } else { cells })
                }
                Job::TwoD { family, seed, hbar, label } => Ok(vec![theorem_d_cell(cfg, &family, seed, hbar, label)?]),
                Job::RandomHierarchy { dim, seed } => Ok(vec![random_hierarchy_cell(dim, seed, cfg.samples)?]),
                Job::Classical => classical_cells(cfg),
            }
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<CellReports> = nested.into_iter().flatten().collect();
    cells.sort_by(|a, b| (a.suite.as_str(), a.family.as_str()).cmp(&(b.suite.as_str(), b.family.as_str())));
    if let Some(slack) = cfg.tolerances.slack_tol {
        for c in &mut cells {
            c.reports = std::mem::take(&mut c.reports).into_iter().map(|r| r.with_slack(slack)).collect();
        }
    }
    Ok(cells)
}

fn one_d_jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (family, seed, tag) in family_seeds(cfg) {
        for &n in &cfg.levels {
            for &hbar in &cfg.hbars {
                let label = cell_label(&family, seed, n, hbar, tag);
                jobs.push(Job::OneD { family: family.clone(), seed, n, hbar, label });
            }
        }
    }
    jobs
}

/// Every proved-inequality suite.
pub fn verify(cfg: &RunConfig) -> Result<Vec<CellReports>> {
    let mut jobs = one_d_jobs(cfg);
    for (family, seed, tag) in family_seeds(cfg) {
        for &hbar in &cfg.hbars {
            let label = cell_label(&family, seed, cfg.levels_2d, hbar, tag);
            jobs.push(Job::TwoD { family: family.clone(), seed, hbar, label });
        }
    }
    for &dim in &cfg.dims {
        for &seed in &cfg.seeds {
            jobs.push(Job::RandomHierarchy { dim, seed });
        }
    }
    jobs.push(Job::Classical);
    run_jobs(cfg, jobs, true, false)
}

/// Information batch tables for one dimension and seed.
pub struct InfoBatch {
    pub label: String,
    pub rows: Vec<InfoBatchRow>,
    pub hierarchy: CellReports,
}

impl InfoBatch {
    pub fn csv(&self) -> String {
        info_batch_csv(&self.rows)
    }
}

fn info_batch(dim: usize, seed: u64, samples: usize) -> Result<InfoBatch> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (rank, sample_seed, rho, k) in random_pairs(dim, seed, samples)? {
        rows.push(InfoBatchRow { dim, rank, seed: sample_seed, report: InfoReport::evaluate(&rho, &k)? });
        reports.extend(check_hierarchy(&rho, &k)?);
    }
    let label = format!("dim{dim}_seed{seed}");
    Ok(InfoBatch { hierarchy: cell("info-batch", label.clone(), reports), label, rows })
}

/// An estimate together with the re-evaluation of its argmax sample.
#[derive(Clone, Debug, Serialize)]
pub struct Estimate {
    pub constant: EmpiricalConstant,
    pub argmax_reevaluated: Option<f64>,
    pub argmax_agrees: bool,
}

fn with_reverification(constant: EmpiricalConstant, reeval: impl Fn(&SampleId) -> qskew_core::Result<Option<f64>>) -> Result<Estimate> {
    let argmax_reevaluated = match &constant.argmax {
        Some(id) => reeval(id)?,
        None => None,
    };
    let argmax_agrees = match (constant.argmax, argmax_reevaluated) {
        (Some(_), Some(r)) => (r - constant.max_ratio).abs() <= REVERIFY_TOL * constant.max_ratio.abs().max(1e-300),
        (None, None) => true,
        _ => false,
    };
    Ok(Estimate { constant, argmax_reevaluated, argmax_agrees })
}

fn estimates(cfg: &RunConfig) -> Result<Vec<Estimate>> {
    let c = &cfg.conjecture;
    let seed = cfg.seeds[0];
    let pairs = PairEnsemble {
        grid: EnsembleGrid { hbars: c.pair_hbars.clone(), levels: c.pair_levels.clone(), samples: c.samples, seed },
    };
    let symbols = SymbolEnsemble {
        grid: EnsembleGrid { hbars: c.symbol_hbars.clone(), levels: c.symbol_levels.clone(), samples: c.samples, seed },
        modes: c.modes,
        base_frequency: c.base_frequency,
        envelope_width: c.envelope_width,
    };
    let [p, q, r] = c.holder;
    let (n, wp) = (c.weak_order, c.weak_p);
    Ok(vec![
        with_reverification(estimate_conjecture_31::<f64>(&pairs)?, |id| reevaluate_conjecture_31::<f64>(&pairs, id))?,
        with_reverification(estimate_quantum_holder::<f64>(&symbols, p, q, r)?, |id| {
            reevaluate_quantum_holder::<f64>(&symbols, id, p, q, r)
        })?,
        with_reverification(estimate_weak_holder::<f64>(&symbols, n, wp)?, |id| reevaluate_weak_holder::<f64>(&symbols, id, n, wp))?,
    ])
}

pub struct SweepOutput {
    pub cells: Vec<CellReports>,
    pub batches: Vec<InfoBatch>,
    pub estimates: Vec<Estimate>,
}

/// Information batches, one-dimensional Schatten ratio tables and the conjecture estimates.
pub fn sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let mut keys = Vec::new();
    for &dim in &cfg.dims {
        for &seed in &cfg.seeds {
            keys.push((dim, seed));
        }
    }
    let batches: Vec<InfoBatch> = keys.into_par_iter().map(|(d, s)| info_batch(d, s, cfg.samples)).collect::<Result<_>>()?;
    let mut cells = run_jobs(cfg, one_d_jobs(cfg), false, true)?;
    let mut batch_cells: Vec<CellReports> = batches.iter().map(|b| b.hierarchy.clone()).collect();
    if let Some(slack) = cfg.tolerances.slack_tol {
        for c in &mut batch_cells {
            c.reports = std::mem::take(&mut c.reports).into_iter().map(|r| r.with_slack(slack)).collect();
        }
    }
    cells.extend(batch_cells);
    let estimates = estimates(cfg)?;
    if estimates.iter().any(|e| !e.argmax_agrees) {
        return Err(anyhow!("argmax re-evaluation disagrees with the recorded maximum"));
    }
    Ok(SweepOutput { cells, batches, estimates })
}
