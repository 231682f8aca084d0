//! Ratio reports shared by every checker, plus CSV/JSON sweep output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scalar::{CMatrix, Real};

/// Default pass slack for exact finite-dimensional checks.
pub const EXACT_SLACK: f64 = 1e-9;
/// Default pass slack for checks on truncated representations.
pub const DISCRETE_SLACK: f64 = 1e-6;

/// How a report participates in pass/fail decisions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// A proved inequality; failure is an error.
    Hard,
    /// Expected to hold up to sampling effects.
    Soft,
    /// An empirical quantity with no pass threshold of its own.
    Statistic,
}

/// One inequality evaluation; `pass ⟺ ratio ≥ 1 − slack_tol` for hard and soft checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    pub slack_tol: f64,
    pub kind: CheckKind,
    pub inputs_digest: String,
    pub truncation_edge_mass: f64,
}

impl RatioReport {
    /// Report for `lhs ≥ rhs`. Sides within `zero_floor` of zero count as zero:
    /// a zero right side gives ratio `1` against a zero left side and `∞` otherwise.
    pub fn greater_equal(name: &str, lhs: f64, rhs: f64, slack_tol: f64, zero_floor: f64) -> Self {
        let ratio = if rhs.abs() > zero_floor {
            lhs / rhs
        } else if lhs > zero_floor {
            f64::INFINITY
        } else if lhs >= -zero_floor {
            1.0
        } else {
            f64::NEG_INFINITY
        };
        let pass = !ratio.is_nan() && ratio >= 1.0 - slack_tol;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            ratio,
            pass,
            slack_tol,
            kind: CheckKind::Hard,
            inputs_digest: String::new(),
            truncation_edge_mass: 0.0,
        }
    }

    /// Empirical ratio `numerator / denominator`; `pass` only records that the ratio is finite.
    pub fn statistic(name: &str, numerator: f64, denominator: f64) -> Self {
        let ratio = if denominator != 0.0 {
            numerator / denominator
        } else if numerator == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self {
            name: name.to_string(),
            lhs: numerator,
            rhs: denominator,
            ratio,
            pass: ratio.is_finite(),
            slack_tol: 0.0,
            kind: CheckKind::Statistic,
            inputs_digest: String::new(),
            truncation_edge_mass: 0.0,
        }
    }

    pub fn with_kind(mut self, kind: CheckKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_digest(mut self, digest: String) -> Self {
        self.inputs_digest = digest;
        self
    }

    pub fn with_edge_mass(mut self, mass: f64) -> Self {
        self.truncation_edge_mass = mass;
        self
    }

    /// Re-decides `pass` for hard and soft checks against a new slack tolerance.
    pub fn with_slack(mut self, slack_tol: f64) -> Self {
        if self.kind != CheckKind::Statistic {
            self.slack_tol = slack_tol;
            self.pass = !self.ratio.is_nan() && self.ratio >= 1.0 - slack_tol;
        }
        self
    }

    /// True unless this is a failed hard check.
    pub fn hard_ok(&self) -> bool {
        self.kind != CheckKind::Hard || self.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("RatioReport serializes")
    }
}

/// SHA-256 over the bit patterns of every input, hex encoded.
#[derive(Clone, Default)]
pub struct InputsDigest(Sha256);

impl InputsDigest {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    pub fn label(mut self, s: &str) -> Self {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
        self
    }

    pub fn scalar<T: Real>(mut self, x: T) -> Self {
        self.0.update(x.as_f64().to_bits().to_le_bytes());
        self
    }

    pub fn matrix<T: Real>(mut self, m: &CMatrix<T>) -> Self {
        self.0.update((m.nrows() as u64).to_le_bytes());
        self.0.update((m.ncols() as u64).to_le_bytes());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                self.0.update(z.re.as_f64().to_bits().to_le_bytes());
                self.0.update(z.im.as_f64().to_bits().to_le_bytes());
            }
        }
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

pub const REPORT_CSV_HEADER: &str = "name,kind,lhs,rhs,ratio,pass,slack_tol,truncation_edge_mass,inputs_digest";

fn kind_str(k: CheckKind) -> &'static str {
    match k {
        CheckKind::Hard => "hard",
        CheckKind::Soft => "soft",
        CheckKind::Statistic => "statistic",
    }
}

/// One report per row.
pub fn reports_csv(reports: &[RatioReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{:e},{:e},{:e},{},{:e},{:e},{}\n",
            r.name,
            kind_str(r.kind),
            r.lhs,
            r.rhs,
            r.ratio,
            r.pass,
            r.slack_tol,
            r.truncation_edge_mass,
            r.inputs_digest
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub count: usize,
    pub passed: usize,
    pub hard_failures: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Per-name counts and extreme ratios.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub families: BTreeMap<String, FamilySummary>,
    pub total: usize,
    pub hard_failures: usize,
}

impl SweepSummary {
    pub fn from_reports(reports: &[RatioReport]) -> Self {
        let mut s = SweepSummary::default();
        for r in reports {
            let e = s.families.entry(r.name.clone()).or_insert(FamilySummary {
                count: 0,
                passed: 0,
                hard_failures: 0,
                min_ratio: f64::INFINITY,
                max_ratio: f64::NEG_INFINITY,
            });
            e.count += 1;
            e.passed += r.pass as usize;
            e.min_ratio = e.min_ratio.min(r.ratio);
            e.max_ratio = e.max_ratio.max(r.ratio);
            if !r.hard_ok() {
                e.hard_failures += 1;
                s.hard_failures += 1;
            }
            s.total += 1;
        }
        s
    }

    pub fn all_hard_pass(&self) -> bool {
        self.hard_failures == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_matches_ratio_threshold() {
        let r = RatioReport::greater_equal("a", 0.9999999999, 1.0, 1e-9, 0.0);
        assert!(r.pass);
        let r = RatioReport::greater_equal("a", 0.99, 1.0, 1e-9, 0.0);
        assert!(!r.pass && !r.hard_ok());
        let r = r.with_slack(0.02);
        assert!(r.pass && r.slack_tol == 0.02);
        let s = RatioReport::statistic("s", 1.0, 4.0).with_slack(0.0);
        assert!(s.pass && s.slack_tol == 0.0);
    }

    #[test]
    fn zero_sides() {
        assert_eq!(RatioReport::greater_equal("z", 0.0, 0.0, 1e-9, 1e-12).ratio, 1.0);
        assert_eq!(RatioReport::greater_equal("z", 1.0, 1e-15, 1e-9, 1e-12).ratio, f64::INFINITY);
        assert!(!RatioReport::greater_equal("z", -1.0, 0.0, 1e-9, 1e-12).pass);
    }

    #[test]
    fn statistic_flags_infinite() {
        assert!(!RatioReport::statistic("s", 1.0, 0.0).pass);
        assert!(RatioReport::statistic("s", 0.0, 0.0).pass);
        assert!(RatioReport::statistic("s", 2.0, 4.0).hard_ok());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let m = CMatrix::<f64>::identity(2, 2);
        let a = InputsDigest::new().label("x").matrix(&m).scalar(1.0).finish();
        let b = InputsDigest::new().label("x").matrix(&m).scalar(1.0).finish();
        let c = InputsDigest::new().label("x").matrix(&m).scalar(1.0 + f64::EPSILON).finish();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn summary_counts() {
        let reps = vec![
            RatioReport::greater_equal("f", 2.0, 1.0, 1e-9, 0.0),
            RatioReport::greater_equal("f", 0.5, 1.0, 1e-9, 0.0),
            RatioReport::statistic("g", 3.0, 1.0),
        ];
        let s = SweepSummary::from_reports(&reps);
        assert_eq!(s.total, 3);
        assert_eq!(s.hard_failures, 1);
        assert_eq!(s.families["f"].min_ratio, 0.5);
        assert_eq!(reports_csv(&reps).lines().count(), 4);
    }
}
