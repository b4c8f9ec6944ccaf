use crate::bohr::BohrSet;
use crate::constants::Constants;
use crate::func::{conv, inner_wrt, lp_norm_wrt, FuncR, ProbMeasure};
use crate::num;
use crate::set::GSet;
use crate::{KmError, Result};

use super::{ge, mu};

/// Where the lifting takes place: the whole group, or a regular Bohr set
/// `B` with a narrower `B'` carrying `C`.
#[derive(Clone, Copy, Debug)]
pub enum LiftContext<'a> {
    Global,
    Bohr { b: &'a BohrSet, b_prime: &'a BohrSet },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftOutcome {
    /// `|⟨μ_A * μ_A, μ_C⟩ - target| ≤ ε · target`.
    NearUniform { inner: f64, target: f64 },
    /// `‖(μ_A - u) * (μ_A - u)‖_{p(w)} ≥ ε/2 · target`.
    Lp {
        p: u32,
        norm: f64,
        inner: f64,
        target: f64,
    },
}

impl LiftOutcome {
    pub fn target(&self) -> f64 {
        match *self {
            LiftOutcome::NearUniform { target, .. } | LiftOutcome::Lp { target, .. } => target,
        }
    }
}

struct Setup {
    u: FuncR,
    w: Option<ProbMeasure>,
    target: f64,
    gamma: f64,
}

fn setup(a: &GSet, c: &GSet, eps: f64, ctx: LiftContext, k: &Constants) -> Result<Setup> {
    let g = a.group();
    match ctx {
        LiftContext::Global => Ok(Setup {
            u: FuncR::constant(g, 1.0),
            w: None,
            target: 1.0,
            gamma: c.density(),
        }),
        LiftContext::Bohr { b, b_prime } => {
            if !a.is_subset(b.members()) {
                return Err(KmError::Hypothesis("A is not inside B".into()));
            }
            if !c.is_subset(b_prime.members()) {
                return Err(KmError::Hypothesis("C is not inside B'".into()));
            }
            let alpha = a.density_in(b.members());
            let rho = k.c_narrow * eps * alpha / b.rank() as f64;
            let narrow = b.dilate(rho)?;
            if !b_prime.members().is_subset(narrow.members()) {
                return Err(KmError::Hypothesis(alloc::format!(
                    "B' is not inside B_rho for rho = {rho:.3e}"
                )));
            }
            Ok(Setup {
                u: b.measure().into_func(),
                w: Some(b_prime.measure()),
                target: 1.0 / b.density(),
                gamma: c.density_in(b_prime.members()),
            })
        }
    }
}

/// Largest exponent searched: `2⌈k_hold · ln(2/γ)⌉`.
pub fn holder_bound(gamma: f64, k_hold: f64) -> u32 {
    2 * (num::ceil(k_hold * num::log_scale(gamma)) as u32).max(1)
}

/// Either certifies that `⟨μ_A * μ_A, μ_C⟩` is close to its expected value,
/// or finds the smallest even `p` at which the balanced convolution has a
/// large `L^p` norm.
pub fn holder_lift(
    a: &GSet,
    c: &GSet,
    eps: f64,
    ctx: LiftContext,
    k: &Constants,
) -> Result<LiftOutcome> {
    let mu_a = mu(a)?;
    let mu_c = mu(c)?;
    let s = setup(a, c, eps, ctx, k)?;
    let aa = conv(mu_a.func(), mu_a.func())?;
    let inner = inner_wrt(&aa, mu_c.func(), None)?;
    if num::abs(inner - s.target) <= eps * s.target {
        return Ok(LiftOutcome::NearUniform {
            inner,
            target: s.target,
        });
    }
    let d = mu_a.func().sub(&s.u)?;
    let f = conv(&d, &d)?;
    let bound = holder_bound(s.gamma, k.k_hold);
    let want = eps / 2.0 * s.target;
    let mut best = 0.0f64;
    for p in (2..=bound).step_by(2) {
        let norm = lp_norm_wrt(&f, p as f64, s.w.as_ref())?;
        if ge(norm, want) {
            return Ok(LiftOutcome::Lp {
                p,
                norm,
                inner,
                target: s.target,
            });
        }
        best = best.max(norm);
    }
    Err(KmError::ConstantBusting {
        constant: "k_hold".into(),
        detail: alloc::format!(
            "no even p <= {bound} reaches {want:.6e}; best norm {best:.6e}"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn whole_group_is_near_uniform() {
        let g = Group::cyclic(5).unwrap();
        let full = GSet::full(&g);
        let out = holder_lift(&full, &full, 0.1, LiftContext::Global, &Constants::default());
        assert!(matches!(out, Ok(LiftOutcome::NearUniform { .. })));
    }

    #[test]
    fn point_mass_lifts_at_p2() {
        let g = Group::cyclic(5).unwrap();
        let a = GSet::from_indices(&g, [0]);
        let c = GSet::from_indices(&g, [1]);
        match holder_lift(&a, &c, 0.5, LiftContext::Global, &Constants::default()).unwrap() {
            LiftOutcome::Lp { p, norm, .. } => {
                assert_eq!(p, 2);
                assert!((norm - 2.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exhaustive_z7_lands_in_one_variant() {
        let g = Group::cyclic(7).unwrap();
        let k = Constants::default();
        for am in 1u32..128 {
            for cm in 1u32..128 {
                let a = GSet::from_fn(&g, |i| am >> i & 1 == 1);
                let c = GSet::from_fn(&g, |i| cm >> i & 1 == 1);
                match holder_lift(&a, &c, 0.25, LiftContext::Global, &k).unwrap() {
                    LiftOutcome::NearUniform { inner, .. } => assert!((inner - 1.0).abs() <= 0.25),
                    LiftOutcome::Lp { p, norm, inner, .. } => {
                        assert!((inner - 1.0).abs() > 0.25);
                        assert_eq!(p % 2, 0);
                        assert!(norm >= 0.125 - 1e-12);
                    }
                }
            }
        }
    }
}
