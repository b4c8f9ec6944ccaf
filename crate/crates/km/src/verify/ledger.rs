//! The committed record of calibrated constants (`constants.json`).

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use km_core::Constants;
use serde::{Deserialize, Serialize};

use super::SuiteReport;

/// The built-in copy of the repository ledger.
const COMMITTED: &str = include_str!("../../../../constants.json");

/// Calibrated constants and the suite that measures each of them.
pub const CALIBRATED: &[(&str, &str)] = &[
    ("k_unb", "unbalancing"),
    ("k_regconv", "regconv"),
    ("c_cover", "fourierbohr"),
];

/// Constants bounded from below by their observations; the rest are upper
/// bounds.
pub(super) fn is_min_type(name: &str) -> bool {
    name == "c_cover"
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalEntry {
    /// The observed extreme value.
    pub value: f64,
    pub suite: String,
    pub instances: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ledger {
    pub schema_version: u32,
    pub constants: Constants,
    pub empirical: BTreeMap<String, EmpiricalEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerCheck {
    pub observed: f64,
    /// Value observed at calibration time.
    pub recorded: Option<f64>,
    pub relative_difference: Option<f64>,
    pub within_10_percent: bool,
    /// The constant in force.
    pub threshold: f64,
    /// The observation is on the wrong side of the constant in force.
    pub regression: bool,
}

/// Rounds `x > 0` to two significant digits, up or down.
fn round_sig(x: f64, up: bool) -> f64 {
    let e = x.abs().log10().floor() as i32 - 1;
    let m = if e < 0 { x * 10f64.powi(-e) } else { x / 10f64.powi(e) };
    let r = if up { m.ceil() } else { m.floor() };
    if e < 0 {
        r / 10f64.powi(-e)
    } else {
        r * 10f64.powi(e)
    }
}

fn field<'a>(k: &'a mut Constants, name: &str) -> Option<&'a mut f64> {
    match name {
        "k_unb" => Some(&mut k.k_unb),
        "k_regconv" => Some(&mut k.k_regconv),
        "c_cover" => Some(&mut k.c_cover),
        _ => None,
    }
}

impl Ledger {
    pub fn committed() -> Ledger {
        serde_json::from_str(COMMITTED).expect("the built-in ledger parses")
    }

    pub fn load(path: &Path) -> anyhow::Result<Ledger> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading ledger {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing ledger {}", path.display()))
    }

    pub fn threshold(&self, name: &str) -> Option<f64> {
        let mut k = self.constants.clone();
        field(&mut k, name).map(|v| *v)
    }

    pub fn check(&self, report: &SuiteReport) -> BTreeMap<String, LedgerCheck> {
        let mut out = BTreeMap::new();
        for &(name, suite) in CALIBRATED {
            if suite != report.suite.name() {
                continue;
            }
            let Some(&observed) = report.empirical_constants.get(name) else {
                continue;
            };
            let threshold = self.threshold(name).expect("calibrated name");
            let recorded = self.empirical.get(name).map(|e| e.value);
            let rel = recorded.map(|r| (observed - r).abs() / r.abs().max(f64::MIN_POSITIVE));
            let regression = if is_min_type(name) {
                observed < threshold
            } else {
                observed > threshold
            };
            out.insert(
                name.to_string(),
                LedgerCheck {
                    observed,
                    recorded,
                    relative_difference: rel,
                    within_10_percent: rel.is_some_and(|r| r <= 0.1),
                    threshold,
                    regression,
                },
            );
        }
        out
    }

    /// Records the constants measured by `report`: upper-bound constants get
    /// 1.1 times the observed maximum, `c_cover` half the observed minimum,
    /// each rounded outward to two significant digits. Returns the names
    /// that were updated.
    pub fn calibrate(&mut self, report: &SuiteReport) -> Vec<String> {
        let mut updated = Vec::new();
        for &(name, suite) in CALIBRATED {
            if suite != report.suite.name() {
                continue;
            }
            let Some(&observed) = report.empirical_constants.get(name) else {
                continue;
            };
            if !observed.is_finite() || observed <= 0.0 {
                continue;
            }
            let derived = if is_min_type(name) {
                round_sig(observed * 0.5, false)
            } else {
                round_sig(observed * 1.1, true)
            };
            *field(&mut self.constants, name).expect("calibrated name") = derived;
            self.empirical.insert(
                name.to_string(),
                EmpiricalEntry {
                    value: observed,
                    suite: suite.to_string(),
                    instances: report.instances,
                    seed: report.seed,
                },
            );
            updated.push(name.to_string());
        }
        updated
    }

    /// Constants with every calibrated bound relaxed, used while measuring.
    pub fn relaxed(k: &Constants) -> Constants {
        Constants {
            k_unb: 1e9,
            k_regconv: f64::INFINITY,
            c_cover: 0.0,
            ..k.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.234, true), 1.3);
        assert_eq!(round_sig(0.0456, false), 0.045);
        assert_eq!(round_sig(17.01, true), 18.0);
    }

    #[test]
    fn committed_ledger_matches_defaults() {
        assert_eq!(Ledger::committed().constants, Constants::default());
    }
}
