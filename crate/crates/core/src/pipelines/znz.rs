use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bohr::BohrSet;
use crate::constants::Constants;
use crate::func::{conv, diffconv, inner_wrt, FuncR};
use crate::group::Group;
use crate::km::{
    bour_narrow, find_smoothing_bohr, holder_lift, lp_orth, posdef_measure, sift_on, BohrBudget,
    LiftContext, LiftOutcome, NarrowOutcome,
};
use crate::num;
use crate::set::GSet;
use crate::{KmError, Result};

/// What the final cell has to certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    /// `⟨μ_{A'} * μ_{A'}, μ_{2·A''}⟩ ≥ ½ μ(B1)⁻¹` with `A'' = A' ∩ B2`.
    ThreeAp,
    /// `μ_{B2}(A' + A') ≥ 1 - α/4`.
    SumSet,
}

impl Goal {
    pub fn k(self) -> i64 {
        match self {
            Goal::ThreeAp => 2,
            Goal::SumSet => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZnzConfig {
    pub eps: f64,
    pub max_steps: usize,
    pub trials: u64,
    pub seed: u64,
    pub goal: Goal,
    pub bohr: BohrBudget,
}

impl Default for ZnzConfig {
    fn default() -> Self {
        ZnzConfig {
            eps: 0.25,
            max_steps: 8,
            trials: 20_000,
            seed: 0,
            goal: Goal::ThreeAp,
            bohr: BohrBudget::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// The narrowing found an increment on `B1`.
    NarrowB1,
    /// The narrowing found an increment on `B2`.
    NarrowB2,
    /// Hölder lifting, unbalancing, sifting and Bohr smoothing.
    Smoothing,
}

/// One increment: `A_{t+1} = (P - shift) ∩ bohr` where the parent `P` is
/// `A_t`, or `(A_t - x) ∩ B1` when `via = Some((B1, x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZnzStep {
    pub kind: StepKind,
    pub bohr: BohrSet,
    pub via: Option<(BohrSet, usize)>,
    pub shift: usize,
    pub density_before: f64,
    pub density: f64,
    pub required: f64,
    pub p: Option<u32>,
    pub p_prime: Option<u32>,
    pub p_sift: Option<u32>,
}

/// The cell in which the goal was certified. `a_prime ⊆ A - translate`.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalCell {
    pub b: BohrSet,
    pub b1: BohrSet,
    pub b2: BohrSet,
    pub a_prime: GSet,
    pub alpha: f64,
    pub translate: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZnzTerminal {
    NearUniformCert { value: f64, target: f64 },
    BudgetExceeded { stage: String, detail: String },
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZnzTrace {
    pub eps: f64,
    pub goal: Goal,
    pub initial_density: f64,
    pub steps: Vec<ZnzStep>,
    pub final_cell: Option<FinalCell>,
    pub terminal: ZnzTerminal,
}

#[allow(clippy::large_enum_variant)]
enum Chain {
    Done(ZnzTerminal),
    Step(ZnzStep, GSet, usize),
}

fn stop(stage: &str, detail: impl ToString) -> Chain {
    Chain::Done(ZnzTerminal::BudgetExceeded {
        stage: stage.to_string(),
        detail: detail.to_string(),
    })
}

macro_rules! stage {
    ($name:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Ok(stop($name, e)),
        }
    };
}

fn regularize(b: &BohrSet, rho: f64, k: &Constants) -> Result<BohrSet> {
    Ok(b.dilate(rho)?.regular_dilate(k.reg_const)?.1)
}

/// Runs the Bohr-set increment iteration on `A ⊆ G` (cyclic) until the
/// goal is certified in a cell or a budget runs out.
pub fn roth_znz_driver(a: &GSet, cfg: &ZnzConfig, k: &Constants) -> Result<ZnzTrace> {
    let g = a.group().clone();
    if g.rank() != 1 {
        return Err(KmError::InvalidArgument(alloc::format!("{g} is not cyclic")));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(KmError::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    let mut trace = ZnzTrace {
        eps: cfg.eps,
        goal: cfg.goal,
        initial_density: a.density(),
        steps: Vec::new(),
        final_cell: None,
        terminal: ZnzTerminal::Empty,
    };
    if a.is_empty() {
        return Ok(trace);
    }
    let mut b = BohrSet::whole(&g).certify(k.reg_const);
    let mut at = a.clone();
    let mut translate = 0usize;
    loop {
        let alpha = at.density_in(b.members());
        let rho = k.c_narrow * alpha * cfg.eps / b.rank() as f64;
        let seed = cfg.seed.wrapping_add(trace.steps.len() as u64);
        match one_step(&g, &b, &at, alpha, rho, translate, seed, cfg, k, &mut trace)? {
            Chain::Done(t) => {
                trace.terminal = t;
                return Ok(trace);
            }
            Chain::Step(..) if trace.steps.len() >= cfg.max_steps => {
                trace.terminal = ZnzTerminal::BudgetExceeded {
                    stage: "steps".into(),
                    detail: alloc::format!("increment {} exceeds the step budget", cfg.max_steps + 1),
                };
                return Ok(trace);
            }
            Chain::Step(step, next, shift_total) => {
                b = step.bohr.clone();
                at = next;
                translate = g.add(translate, shift_total);
                trace.steps.push(step);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn one_step(
    g: &Group,
    b: &BohrSet,
    at: &GSet,
    alpha: f64,
    rho: f64,
    translate: usize,
    seed: u64,
    cfg: &ZnzConfig,
    k: &Constants,
    trace: &mut ZnzTrace,
) -> Result<Chain> {
    let eps = cfg.eps;
    let required = (1.0 + eps / k.c_inc) * alpha;
    let b1 = stage!("regularize", regularize(b, rho, k));
    let b2 = stage!("regularize", regularize(&b1, rho / 2.0, k));
    let narrow = stage!("narrow", bour_narrow(at, b, &b1, &b2, eps, k));
    let x = match narrow {
        NarrowOutcome::IncOnBPrime { x, .. } | NarrowOutcome::IncOnBDoublePrime { x, .. } => {
            let (kind, cell) = match narrow {
                NarrowOutcome::IncOnBPrime { .. } => (StepKind::NarrowB1, b1),
                _ => (StepKind::NarrowB2, b2),
            };
            let next = at.translate(g.neg(x)).intersection(cell.members());
            let density = next.density_in(cell.members());
            let step = ZnzStep {
                kind,
                bohr: cell,
                via: None,
                shift: x,
                density_before: alpha,
                density,
                required,
                p: None,
                p_prime: None,
                p_sift: None,
            };
            return Ok(Chain::Step(step, next, x));
        }
        NarrowOutcome::Translate { x, .. } => x,
    };
    let a1 = at.translate(g.neg(x)).intersection(b1.members());
    let alpha1 = a1.density_in(b1.members());
    let target = 1.0 / b1.density();
    let mu_a1 = FuncR::indicator(&a1).scale(1.0 / a1.density());
    let (c, holder_ctx, value, goal_target) = match cfg.goal {
        Goal::ThreeAp => {
            let a2 = a1.intersection(b2.members());
            // the image {2a}; 2 need not be invertible mod 3N + 1
            let c = GSet::from_indices(g, a2.iter().map(|y| g.mul(2, y)));
            let aa = conv(&mu_a1, &mu_a1)?;
            let mu_c = FuncR::indicator(&c).scale(1.0 / c.density());
            let inner = inner_wrt(&aa, &mu_c, None)?;
            let ctx = stage!("holder", b2.dilate(2.0));
            (c, ctx, inner, target / 2.0)
        }
        Goal::SumSet => {
            let ss = a1.sumset(&a1)?;
            let dens = ss.density_in(b2.members());
            let c = b2.members().difference(&ss);
            (c, b2.clone(), dens, 1.0 - alpha1 / 4.0)
        }
    };
    if value >= goal_target - 1e-12 {
        trace.final_cell = Some(FinalCell {
            b: b.clone(),
            b1,
            b2,
            a_prime: a1,
            alpha: alpha1,
            translate: g.add(translate, x),
        });
        return Ok(Chain::Done(ZnzTerminal::NearUniformCert {
            value,
            target: goal_target,
        }));
    }
    let ctx = LiftContext::Bohr {
        b: &b1,
        b_prime: &holder_ctx,
    };
    let p = match stage!("holder", holder_lift(&a1, &c, 0.5, ctx, k)) {
        LiftOutcome::Lp { p, .. } => p,
        LiftOutcome::NearUniform { inner, .. } => {
            return Ok(stop("holder", alloc::format!("lift reported near-uniform ({inner:.6e})")))
        }
    };
    let kk = cfg.goal.k() as f64;
    let d = b.rank() as f64;
    let x3 = stage!("posdef", regularize(&b2, kk * k.c_narrow / d, k));
    let x4 = stage!("posdef", regularize(&x3, k.c_narrow / d, k));
    let nu = stage!("posdef", posdef_measure(&x3, &x4));
    let eps_o = 0.125;
    let orth = stage!("lp_orth", lp_orth(&a1, &b1, &nu, eps_o, p, k));
    let eta = eps_o / 4.0;

    // ν averages μ_X ∘ μ_{X - y} over y ∈ Y - Y; pick the best y.
    let gg = diffconv(&mu_a1, &mu_a1)?;
    let top = gg.max();
    let gp = gg.map(|v| num::powf(v / top, orth.p_prime as f64));
    let mu_x = x3.measure();
    let rho0 = mu_x.diffconv(&mu_x)?;
    let weights = diffconv(&gp, rho0.func())?;
    let yy = x4.members().sumset(x4.members())?;
    let y = yy
        .iter()
        .max_by(|&i, &j| weights.value(i).total_cmp(&weights.value(j)).then(j.cmp(&i)))
        .expect("0 lies in Y + Y");
    let s1 = x3.members().clone();
    let s2 = x3.members().translate(g.neg(y));

    let s = GSet::from_fn(g, |z| gg.value(z) >= (1.0 + eta / 2.0) * target);
    let delta = eta / 8.0;
    let eps_s = 1.0 - (1.0 + eta / 2.0) / (1.0 + eta);
    let p_sift = orth.p_prime + num::ceil(num::ln(2.0 / delta) / eps_s) as u32;
    let sr = stage!("sift", sift_on(&a1, &s1, &s2, &s, p_sift, delta, cfg.trials, seed));
    let h = diffconv(
        &FuncR::indicator(&sr.drc.a1),
        &FuncR::indicator(&sr.drc.a2),
    )?;
    let s_eff = s.intersection(&h.support_set());
    let sm = stage!(
        "smoothing",
        find_smoothing_bohr(&x3, &x4, &sr.drc.a1, &sr.drc.a2, &s_eff, eta / 8.0, &cfg.bohr)
    );
    let cell = sm.found;
    let dens = conv(&FuncR::indicator(&a1), cell.measure().func())?;
    let mut shift = 0;
    for z in 0..g.size() {
        if dens.value(z) > dens.value(shift) {
            shift = z;
        }
    }
    let next = a1.translate(g.neg(shift)).intersection(cell.members());
    let density = next.density_in(cell.members());
    if density + 1e-12 < required {
        return Ok(stop(
            "certify",
            alloc::format!("density {density:.6} below required {required:.6}"),
        ));
    }
    let step = ZnzStep {
        kind: StepKind::Smoothing,
        bohr: cell,
        via: Some((b1, x)),
        shift,
        density_before: alpha,
        density,
        required,
        p: Some(p),
        p_prime: Some(orth.p_prime),
        p_sift: Some(p_sift),
    };
    Ok(Chain::Step(step, next, g.add(x, shift)))
}

/// Rebuilds every `A_t` from `A` and the recorded cells, checking regularity,
/// the recorded densities and the increment bound.
pub fn replay_znz(a: &GSet, trace: &ZnzTrace, k: &Constants) -> Result<()> {
    let g = a.group();
    let fail = |msg: String| Err(KmError::Hypothesis(msg));
    let mut at = a.clone();
    let mut alpha = a.density();
    if (alpha - trace.initial_density).abs() > 1e-12 {
        return fail("initial density mismatch".into());
    }
    for (i, s) in trace.steps.iter().enumerate() {
        if !s.bohr.is_regular(k.reg_const).is_regular() {
            return fail(alloc::format!("step {i}: cell is not regular"));
        }
        let parent = match &s.via {
            None => at.clone(),
            Some((b1, x)) => at.translate(g.neg(*x)).intersection(b1.members()),
        };
        let next = parent.translate(g.neg(s.shift)).intersection(s.bohr.members());
        let d = next.density_in(s.bohr.members());
        if (d - s.density).abs() > 1e-12 {
            return fail(alloc::format!("step {i}: density {d} != {}", s.density));
        }
        let required = (1.0 + trace.eps / k.c_inc) * alpha;
        if d + 1e-12 < required {
            return fail(alloc::format!("step {i}: density {d} below {required}"));
        }
        at = next;
        alpha = d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipelines::{behrend, embed_interval, Strategy};

    #[test]
    fn interval_is_certified_at_once() {
        let a: Vec<u64> = (1..=100).collect();
        let (_, set) = embed_interval(&a, 100).unwrap();
        let k = Constants::default();
        let t = roth_znz_driver(&set, &ZnzConfig::default(), &k).unwrap();
        assert!(t.steps.is_empty());
        assert!(matches!(t.terminal, ZnzTerminal::NearUniformCert { .. }), "{:?}", t.terminal);
    }

    #[test]
    fn behrend_set_trace_replays() {
        let a = behrend(50, Strategy::Sphere);
        let (_, set) = embed_interval(&a, 50).unwrap();
        let k = Constants::default();
        let t = roth_znz_driver(&set, &ZnzConfig::default(), &k).unwrap();
        replay_znz(&set, &t, &k).unwrap();
        for s in &t.steps {
            assert!(s.density >= s.required);
        }
        if let Some(fc) = &t.final_cell {
            let shifted = set.translate(set.group().neg(fc.translate));
            assert!(fc.a_prime.is_subset(&shifted));
        }
    }

    #[test]
    fn empty_input() {
        let g = Group::cyclic(31).unwrap();
        let t = roth_znz_driver(&GSet::empty(&g), &ZnzConfig::default(), &Constants::default())
            .unwrap();
        assert_eq!(t.terminal, ZnzTerminal::Empty);
    }
}
