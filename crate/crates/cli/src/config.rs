//! JSON run configuration. Precedence: built-in defaults, then the config
//! file, then command-line flags.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qskew_core::inequality::P_GRID;
use qskew_core::operator::DensityOperator;
use qskew_core::phase_space::{states, PhaseSpaceRep};
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Verify,
    Sweep,
    Search,
    Replay,
    Constants,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Named one-dimensional state family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    Ground {},
    Fock { k: usize },
    Squeezed { r: f64 },
    Coherent { re: f64, im: f64 },
    Thermal { q: f64 },
    /// Gaussian-induced state on the lowest `levels` levels; drawn from the run seed.
    Random { levels: usize, rank: usize },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Ground {} => "ground".into(),
            Family::Fock { k } => format!("fock-{k}"),
            Family::Squeezed { r } => format!("squeezed-r{r}"),
            Family::Coherent { re, im } => format!("coherent-{re}{im:+}i"),
            Family::Thermal { q } => format!("thermal-q{q}"),
            Family::Random { levels, rank } => format!("random-l{levels}-r{rank}"),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Family::Random { .. })
    }

    pub fn build(&self, rep: &PhaseSpaceRep<f64>, seed: u64) -> qskew_core::Result<DensityOperator<f64>> {
        match *self {
            Family::Ground {} => states::ground(rep),
            Family::Fock { k } => states::fock(rep, k),
            Family::Squeezed { r } => states::squeezed(rep, r),
            Family::Coherent { re, im } => states::coherent(rep, Complex64::new(re, im)),
            Family::Thermal { q } => states::thermal(rep, q),
            Family::Random { levels, rank } => states::random_low_level(rep, levels, rank, seed),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Replaces the slack of every hard and soft check when set.
    pub slack_tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub objective: String,
    pub dim: usize,
    pub budget: usize,
    pub restarts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { objective: "skew-violation".into(), dim: 4, budget: 100_000, restarts: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjectureConfig {
    pub samples: usize,
    pub pair_hbars: Vec<f64>,
    pub pair_levels: Vec<usize>,
    pub symbol_hbars: Vec<f64>,
    pub symbol_levels: Vec<usize>,
    pub modes: usize,
    pub base_frequency: f64,
    pub envelope_width: f64,
    /// `(p, q, r)` for the quantum Hölder estimate.
    pub holder: [f64; 3],
    pub weak_order: usize,
    pub weak_p: f64,
}

impl Default for ConjectureConfig {
    fn default() -> Self {
        Self {
            samples: 8,
            pair_hbars: vec![1.0, 0.5, 0.1],
            pair_levels: vec![24],
            symbol_hbars: vec![1.0, 0.25],
            symbol_levels: vec![16, 32],
            modes: 2,
            base_frequency: 1.0,
            envelope_width: 0.6,
            holder: [2.0, 4.0, 4.0],
            weak_order: 2,
            weak_p: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when present.
    pub command: Option<CommandName>,
    pub families: Vec<Family>,
    /// Matrix dimensions for the random hierarchy ensemble.
    pub dims: Vec<usize>,
    /// Basis sizes `N` for one-dimensional checks.
    pub levels: Vec<usize>,
    /// Basis size per axis for two-dimensional checks.
    pub levels_2d: usize,
    pub hbars: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Random samples per dimension and seed.
    pub samples: usize,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub format: Format,
    pub tolerances: Tolerances,
    pub search: SearchConfig,
    pub conjecture: ConjectureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            families: vec![
                Family::Ground {},
                Family::Squeezed { r: 0.3 },
                Family::Coherent { re: 0.5, im: -0.25 },
                Family::Thermal { q: 0.3 },
                Family::Random { levels: 4, rank: 3 },
            ],
            dims: vec![2, 3, 4, 8],
            levels: vec![32],
            levels_2d: 12,
            hbars: vec![1.0, 0.1],
            p_grid: P_GRID.to_vec(),
            seeds: vec![1],
            samples: 20,
            out: PathBuf::from("qskew-out"),
            workers: None,
            format: Format::Csv,
            tolerances: Tolerances::default(),
            search: SearchConfig::default(),
            conjecture: ConjectureConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self, command: CommandName) -> Result<(), UsageError> {
        let fail = |m: String| Err(UsageError(m));
        if let Some(c) = self.command {
            if c != command {
                return fail(format!("config is for `{c:?}` but `{command:?}` was requested").to_lowercase());
            }
        }
        if self.workers == Some(0) {
            return fail("--workers must be positive".into());
        }
        if let Some(s) = self.tolerances.slack_tol {
            if !(0.0..1.0).contains(&s) {
                return fail(format!("slack tolerance must lie in [0, 1), got {s}"));
            }
        }
        match command {
            CommandName::Verify | CommandName::Sweep => {
                if self.families.is_empty() {
                    return fail("family list is empty".into());
                }
                if self.levels.is_empty() || self.hbars.is_empty() || self.p_grid.is_empty() || self.dims.is_empty() {
                    return fail("dims, levels, hbars and p_grid must be nonempty".into());
                }
                if self.hbars.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
                    return fail("every ħ must be positive".into());
                }
                if self.p_grid.iter().any(|p| !(p.is_finite() && *p > 1.0)) {
                    return fail("every p must lie in (1, ∞)".into());
                }
                if self.levels.iter().chain(&self.dims).any(|&n| n < 2) || self.levels_2d < 2 {
                    return fail("basis sizes and dimensions must be at least 2".into());
                }
                if self.samples == 0 {
                    return fail("samples must be positive".into());
                }
                if self.seeds.is_empty() {
                    return fail("a seed is required (random ensembles)".into());
                }
            }
            CommandName::Search => {
                if self.seeds.is_empty() {
                    return fail("a seed is required for search".into());
                }
                if self.search.objective != "skew-violation" {
                    return fail(format!("unknown objective `{}` (available: skew-violation)", self.search.objective));
                }
                if self.search.dim < 2 || self.search.restarts == 0 {
                    return fail("search needs dim ≥ 2 and at least one restart".into());
                }
            }
            CommandName::Replay | CommandName::Constants => {}
        }
        Ok(())
    }
}
