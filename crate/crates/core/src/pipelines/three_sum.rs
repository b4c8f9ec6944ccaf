use alloc::string::{String, ToString};

use super::embed::embed_mod;
use super::znz::{roth_znz_driver, Goal, ZnzConfig, ZnzTerminal, ZnzTrace};
use crate::bohr::{ApRun, BohrSet};
use crate::constants::Constants;
use crate::num;
use crate::set::GSet;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct ApReport {
    pub modulus: u64,
    /// Progression in `Z_modulus`, already shifted back into `A + A + A`.
    pub run: ApRun,
    /// `A + A + A`.
    pub container: GSet,
    pub verified: bool,
    /// `B'' = B'_ρ` with `ρ = c_ap · α / rk(B')`.
    pub b_double_prime: BohrSet,
    pub rho: f64,
    pub sumset_density: f64,
    pub sumset_target: f64,
    pub lemma_bound: usize,
    pub trace: ZnzTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThreeSumOutcome {
    Success(ApReport),
    CheckFailed {
        stage: String,
        margin: Option<f64>,
        detail: String,
        trace: Option<ZnzTrace>,
    },
}

fn failed(stage: &str, margin: Option<f64>, detail: String, trace: Option<ZnzTrace>) -> ThreeSumOutcome {
    ThreeSumOutcome::CheckFailed {
        stage: stage.to_string(),
        margin,
        detail,
        trace,
    }
}

/// Finds a long progression in `A + A + A` for `A ⊆ [1, n]`, working in
/// `Z_p` with `p` the least prime `≥ n`: the driver supplies a cell where
/// `A' + A'` fills most of `B'`, the narrowed `B''` is checked to lie in
/// `A' + A' + A'`, and its progression is shifted back and re-verified.
pub fn three_sumset_ap_pipeline(
    a: &[u64],
    n: u64,
    cfg: &ZnzConfig,
    k: &Constants,
) -> Result<ThreeSumOutcome> {
    let p = num::next_prime(n.max(2));
    let (g, set) = embed_mod(a, n, p)?;
    if set.is_empty() {
        return Ok(failed("input", None, "A is empty".into(), None));
    }
    let cfg = ZnzConfig {
        goal: Goal::SumSet,
        ..cfg.clone()
    };
    let trace = roth_znz_driver(&set, &cfg, k)?;
    let fc = match (&trace.terminal, &trace.final_cell) {
        (ZnzTerminal::NearUniformCert { .. }, Some(fc)) => fc.clone(),
        (ZnzTerminal::BudgetExceeded { stage, detail }, _) => {
            let s = alloc::format!("driver:{stage}");
            return Ok(failed(&s, None, detail.clone(), Some(trace)));
        }
        (t, _) => {
            let d = alloc::format!("{t:?}");
            return Ok(failed("driver", None, d, Some(trace)));
        }
    };
    let aa = fc.a_prime.sumset(&fc.a_prime)?;
    let dens = aa.density_in(fc.b2.members());
    let target = 1.0 - fc.alpha / 4.0;
    if dens < target {
        let d = alloc::format!("mu_B'(A'+A') = {dens:.6} < 1 - alpha/4 = {target:.6}");
        return Ok(failed("sumset-density", Some(dens - target), d, Some(trace)));
    }
    let rho = k.c_ap * fc.alpha / fc.b2.rank() as f64;
    let b3 = fc.b2.dilate(rho)?;
    let neg = fc.a_prime.negate();
    let mut missing = 0usize;
    for x in b3.members().iter() {
        if aa.intersection(&neg.translate(x)).is_empty() {
            missing += 1;
        }
    }
    if missing > 0 {
        let margin = -(missing as f64) / b3.size() as f64;
        let d = alloc::format!("{missing} of {} points of B'' outside A'+A'+A'", b3.size());
        return Ok(failed("bohr-in-3A'", Some(margin), d, Some(trace)));
    }
    let mut run = b3.extract_ap()?;
    run.start = g.add(run.start, g.mul(3, fc.translate));
    let container = set.sumset(&set)?.sumset(&set)?;
    let verified = run.inside(&g, &container);
    if !verified {
        return Ok(failed(
            "verify",
            None,
            "progression not inside A+A+A".into(),
            Some(trace),
        ));
    }
    Ok(ThreeSumOutcome::Success(ApReport {
        modulus: p,
        run,
        container,
        verified,
        lemma_bound: b3.ap_lemma_bound(),
        b_double_prime: b3,
        rho,
        sumset_density: dens,
        sumset_target: target,
        trace,
    }))
}
