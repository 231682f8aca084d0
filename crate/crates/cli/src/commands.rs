//! `search`, `replay` and `constants`.

use std::path::Path;

use anyhow::{Context, Result};
use qskew_core::conjecture::{check_witness, search_skew_violation_with, SearchRecord, WitnessCheck};
use qskew_core::inequality::ConstantsTable;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::write_json;
use crate::UsageError;

/// Writes `{out}/search/{objective}/result.json` plus the witness matrices.
pub fn search(cfg: &RunConfig) -> Result<SearchRecord> {
    let s = &cfg.search;
    let result = search_skew_violation_with::<f64>(s.dim, s.budget, cfg.seeds[0], s.restarts)?;
    let record = result.to_record();
    let dir = cfg.out.join("search").join(&s.objective);
    write_json(&dir.join("result.json"), &record)?;
    crate::output::write_text(&dir.join("witness-state.txt"), &record.witness.state)?;
    crate::output::write_text(&dir.join("witness-a.txt"), &record.witness.a)?;
    crate::output::write_text(&dir.join("witness-b.txt"), &record.witness.b)?;
    Ok(record)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayOutcome {
    pub recorded_ratio: f64,
    pub check: WitnessCheck,
    /// The spectral-path objective reproduces the recorded value bit for bit.
    pub bit_identical: bool,
    /// Relative gap between the two skew-information paths.
    pub path_gap: f64,
    pub violation: bool,
}

/// Agreement required between the two skew-information paths on replay.
pub const REPLAY_PATH_TOL: f64 = 1e-10;

pub fn replay(path: &Path) -> Result<ReplayOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let record = SearchRecord::from_json(&text).map_err(|e| UsageError(format!("invalid search record {}: {e}", path.display())))?;
    let (rho, a, b) = record.witness::<f64>().context("decoding witness")?;
    let check = check_witness(&rho, &a, &b)?;
    let path_gap = (check.ratio_commutator_path - check.ratio).abs() / check.ratio.abs().max(f64::MIN_POSITIVE);
    Ok(ReplayOutcome {
        recorded_ratio: record.best_ratio,
        bit_identical: check.ratio.to_bits() == record.best_ratio.to_bits(),
        path_gap,
        violation: check.ratio < 1.0 - qskew_core::conjecture::SUCCESS_MARGIN,
        check,
    })
}

/// Exponents listed in the constants table.
pub const S_VALUES: [f64; 3] = [0.25, 0.5, 0.75];

pub fn constants_table(d: usize) -> Result<ConstantsTable> {
    ConstantsTable::new(d, &S_VALUES).map_err(|e| UsageError(e.to_string()).into())
}

/// Plain-text rendering; every number uses the same shortest round-trip form as the JSON.
pub fn constants_text(t: &ConstantsTable) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<24}{}\n", "d", t.d));
    out.push_str(&format!("{:<24}{}\n", "C^S_(1,2)(d)", t.sobolev_12));
    out.push_str(&format!("{:<24}[{}, {}]\n", "C_d interval", t.c_d_lower, t.c_d_upper));
    out.push_str(&format!("{:<24}{}\n", "C^S_(1,1) (d=2)", t.sobolev_11_2d));
    out.push_str(&format!("\n{:<8}{:<24}{:<24}{}\n", "s", "C_s", "reflection form", "gamma-ratio form"));
    for c in &t.c_s {
        out.push_str(&format!("{:<8}{:<24}{:<24}{}\n", c.s, c.value, c.reflection_form, c.gamma_ratio_form));
    }
    out.push_str(&format!("\n{:<24}{:e}\n", "max form disagreement", t.max_form_disagreement()));
    out
}

pub fn constants(cfg: &RunConfig, d: usize) -> Result<String> {
    let t = constants_table(d)?;
    write_json(&cfg.out.join("constants").join("table.json"), &t)?;
    Ok(match cfg.format {
        Format::Csv => constants_text(&t),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&t)?),
    })
}
