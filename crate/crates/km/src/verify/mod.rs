//! Property suites. Each suite draws seeded instances, discards those that
//! violate the hypotheses of the property, and records a margin per
//! instance (nonnegative means the property held, tolerance included).

mod algebra;
mod bohr;
mod gen;
mod ledger;
mod steps;

use std::collections::BTreeMap;
use std::fmt;

use km_core::rng::{seeded, Rng};
use km_core::Constants;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

pub use ledger::{EmpiricalEntry, Ledger, LedgerCheck, CALIBRATED};

pub const MAX_INSTANCES: usize = 100_000;

/// Draws per instance before it is reported as unsatisfiable.
const MAX_ATTEMPTS: u64 = 64;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}` (known: {1})")]
    UnknownSuite(String, String),
    #[error("{0}")]
    Cap(String),
}

macro_rules! suites {
    ($($var:ident = $name:literal, $run:path, $exh:expr, $stmt:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum SuiteId { $($var),* }

        impl SuiteId {
            pub const ALL: &'static [SuiteId] = &[$(SuiteId::$var),*];

            pub fn name(self) -> &'static str {
                match self { $(SuiteId::$var => $name),* }
            }

            /// The property checked on each instance.
            pub fn statement(self) -> &'static str {
                match self { $(SuiteId::$var => $stmt),* }
            }

            fn run_fn(self) -> RunFn {
                match self { $(SuiteId::$var => $run),* }
            }

            /// Number of enumerated items in exhaustive mode, if supported.
            pub fn exhaustive_items(self) -> Option<usize> {
                match self { $(SuiteId::$var => $exh),* }
            }
        }
    };
}

suites! {
    Adjoint = "adjoint", algebra::adjoint, Some(7 * 7 * 7),
        "<f, g * h> = <h o f, g>";
    ConvFourier = "conv-fourier", algebra::conv_fourier, None,
        "transform of f * g is f^ g^, of f o g is conj(f^) g^, and Parseval";
    MomentSpectrum = "moment-spectrum", algebra::moment_spectrum, None,
        "E f^k equals the k-fold convolution of f^ at the trivial character";
    SpectralNonneg = "spectral-nonneg", algebra::spectral_nonneg, Some(gen::SMALL_SUBSETS),
        "mu_A o mu_A - 1 has nonnegative Fourier transform";
    LpMonotone = "lp-monotone", algebra::lp_monotone, Some(gen::SMALL_SUBSETS),
        "||mu_A * mu_A - 1||_p <= ||mu_A o mu_A - 1||_p for even p";
    OddMoment = "odd-moment", algebra::odd_moment, Some(gen::SMALL_SUBSETS),
        "E (mu_A o mu_A - 1)^k >= 0 for odd k";
    MeanZeroing = "mean-zeroing", algebra::mean_zeroing, Some(gen::SMALL_SUBSETS),
        "subtracting 1 from mu_A only zeroes the trivial coefficient";
    FourierDigression = "fourier-digression", algebra::fourier_digression, Some(127 * 127),
        "<mu_A * mu_A, mu_C> <= 1/2 implies sum over nontrivial l of |mu_A^(l)|^2 |mu_C^(l)| >= 1/2";
    Unbalancing = "unbalancing", steps::unbalancing, None,
        "||f||_p >= eps with f^ >= 0 gives ||f + 1||_p' >= 1 + eps/2 for a small p'";
    DrcIdentity = "drc-identity", steps::drc_identity, Some(steps::DRC_ITEMS),
        "averaging over shifts gives beta1 beta2 alpha^2p <(mu_A o mu_A)^p, f>_mu; both selection inequalities hold";
    Sifting = "sifting", steps::sifting, Some(steps::DRC_ITEMS),
        "sifting returns A1, A2 with <mu_A1 o mu_A2, 1_S> >= 1 - delta";
    Holder = "holder", steps::holder, Some(127 * 127),
        "either <mu_A * mu_A, mu_C> is near 1 or the balanced convolution has large L^p norm";
    Increment = "increment", steps::increment, Some(511),
        "an increment step on a subset of F3^2 certifies ||1_A * mu_V||_inf >= (1 + eps/c) alpha";
    Bour = "bour", steps::bour, None,
        "a translate of A is dense on B' and B'', or A has an increment on one of them";
    LpOrth = "lp-orth", steps::lp_orth, None,
        "unbalancing relative to a regular Bohr set and a positive definite measure";
    Posdef = "posdef", steps::posdef, None,
        "<f o f, nu> >= 0 and the posdef measure has nonnegative spectrum";
    HolderBohr = "holder-bohr", steps::holder_bohr, None,
        "Holder lifting relative to nested Bohr sets";
    Bohrsiz = "bohrsiz", bohr::bohrsiz, None,
        "|B_rho| >= (rho/4)^d |B|";
    Bohrreg = "bohrreg", bohr::bohrreg, None,
        "some rho in [1/2, 1] makes B_rho regular";
    Regconv = "regconv", bohr::regconv, None,
        "||mu_B * mu - mu_B||_1 <= K rho d for mu supported on B_rho";
    Fourierbohr = "fourierbohr", bohr::fourierbohr, None,
        "mu_B <= 2 mu_{B_(1+L rho)} * mu_B'^(L) when rho L d is small";
    BohrAp = "bohr-ap", bohr::bohr_ap, None,
        "a Bohr set in Z_p contains a progression of the guaranteed length";
}

impl SuiteId {
    pub fn parse(s: &str) -> Result<SuiteId, VerifyError> {
        SuiteId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SuiteId::ALL.iter().map(|id| id.name()).collect();
                VerifyError::UnknownSuite(s.to_string(), names.join(", "))
            })
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for SuiteId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Where an instance comes from.
pub enum Source<'a> {
    Random(&'a mut Rng),
    Item(usize),
}

type RunFn = fn(&Constants, Source) -> Option<Instance>;

/// Outcome on one instance. `None` from a suite means the draw violated the
/// hypotheses.
#[derive(Clone, Debug)]
pub struct Instance {
    pub margin: f64,
    pub consts: Vec<(&'static str, f64)>,
    pub counts: Vec<(&'static str, u64)>,
    pub payload: Value,
}

impl Instance {
    pub fn new(margin: f64, payload: Value) -> Self {
        Instance {
            margin,
            consts: Vec::new(),
            counts: Vec::new(),
            payload,
        }
    }

    pub fn with_const(mut self, name: &'static str, v: f64) -> Self {
        self.consts.push((name, v));
        self
    }

    pub fn with_count(mut self, name: &'static str, n: u64) -> Self {
        self.counts.push((name, n));
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSpec {
    pub suite: SuiteId,
    pub instances: usize,
    pub seed: u64,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub margin: f64,
    pub instance: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteId,
    pub statement: &'static str,
    pub seed: u64,
    pub exhaustive: bool,
    pub instances: usize,
    /// Instances whose hypotheses held and were checked.
    pub checked: usize,
    /// Extra draws spent replacing instances that violated the hypotheses.
    pub regenerated: u64,
    /// Instances (or enumerated items) for which no valid draw existed.
    pub skipped: usize,
    pub failures: Vec<Failure>,
    pub min_margin: Option<f64>,
    pub empirical_constants: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub ledger: BTreeMap<String, LedgerCheck>,
    pub passed: bool,
}

fn draw(run: RunFn, k: &Constants, seed: u64, index: usize) -> (Option<Instance>, u64) {
    let mut rng = seeded(seed, index as u64);
    for attempt in 0..MAX_ATTEMPTS {
        if let Some(inst) = run(k, Source::Random(&mut rng)) {
            return (Some(inst), attempt);
        }
    }
    (None, MAX_ATTEMPTS)
}

fn check_spec(spec: &SuiteSpec) -> Result<usize, VerifyError> {
    if spec.exhaustive {
        spec.suite.exhaustive_items().ok_or_else(|| {
            VerifyError::Cap(format!("suite {} has no exhaustive mode", spec.suite))
        })
    } else if spec.instances == 0 || spec.instances > MAX_INSTANCES {
        Err(VerifyError::Cap(format!(
            "instances must lie in 1..={MAX_INSTANCES} (got {})",
            spec.instances
        )))
    } else {
        Ok(spec.instances)
    }
}

/// Runs every instance of `spec` in parallel; results do not depend on the
/// thread count. When `ledger` is given its calibrated constants are
/// compared with the observed ones.
pub fn run_suite(
    spec: &SuiteSpec,
    k: &Constants,
    ledger: Option<&Ledger>,
) -> Result<SuiteReport, VerifyError> {
    let n = check_spec(spec)?;
    let run = spec.suite.run_fn();
    let results: Vec<(Option<Instance>, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            if spec.exhaustive {
                (run(k, Source::Item(i)), 0)
            } else {
                draw(run, k, spec.seed, i)
            }
        })
        .collect();

    let mut report = SuiteReport {
        suite: spec.suite,
        statement: spec.suite.statement(),
        seed: spec.seed,
        exhaustive: spec.exhaustive,
        instances: n,
        checked: 0,
        regenerated: 0,
        skipped: 0,
        failures: Vec::new(),
        min_margin: None,
        empirical_constants: BTreeMap::new(),
        counts: BTreeMap::new(),
        ledger: BTreeMap::new(),
        passed: false,
    };
    for (index, (inst, regen)) in results.into_iter().enumerate() {
        let Some(inst) = inst else {
            report.skipped += 1;
            report.regenerated += regen.saturating_sub(1);
            continue;
        };
        report.regenerated += regen;
        report.checked += 1;
        let m = report.min_margin.map_or(inst.margin, |m| m.min(inst.margin));
        report.min_margin = Some(m);
        for (name, v) in inst.consts {
            let slot = report.empirical_constants.entry(name.to_string()).or_insert(v);
            *slot = if ledger::is_min_type(name) { slot.min(v) } else { slot.max(v) };
        }
        for (name, c) in inst.counts {
            *report.counts.entry(name.to_string()).or_insert(0) += c;
        }
        if inst.margin.is_nan() || inst.margin < 0.0 {
            report.failures.push(Failure {
                index,
                seed: spec.seed,
                margin: inst.margin,
                instance: inst.payload,
            });
        }
    }
    if let Some(l) = ledger {
        report.ledger = l.check(&report);
    }
    report.passed = report.failures.is_empty() && !report.ledger.values().any(|c| c.regression);
    Ok(report)
}

/// Recomputes one instance of a suite from its index.
pub fn replay(spec: &SuiteSpec, index: usize, k: &Constants) -> Result<Option<Instance>, VerifyError> {
    let n = check_spec(spec)?;
    if index >= n {
        return Err(VerifyError::Cap(format!("index {index} out of range 0..{n}")));
    }
    let run = spec.suite.run_fn();
    Ok(if spec.exhaustive {
        run(k, Source::Item(index))
    } else {
        draw(run, k, spec.seed, index).0
    })
}

/// Relative margin `(bound - value) / max(1, |bound|)` of `value ≤ bound`.
fn rel_le(value: f64, bound: f64) -> f64 {
    (bound - value) / bound.abs().max(1.0)
}

fn set_json(a: &km_core::GSet) -> Value {
    serde_json::json!({ "group": a.group().to_string(), "elements": a.to_vec() })
}

fn func_json(f: &km_core::FuncR) -> Value {
    serde_json::json!({ "group": f.group().to_string(), "values": f.values() })
}

fn bohr_json(b: &km_core::BohrSet) -> Value {
    serde_json::json!({
        "group": b.group().to_string(),
        "freqs": b.freqs(),
        "widths": b.widths(),
        "size": b.size(),
    })
}
