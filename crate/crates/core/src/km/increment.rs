use alloc::vec;

use crate::constants::Constants;
use crate::func::{diffconv, FuncR};
use crate::num;
use crate::set::GSet;
use crate::{KmError, Result};

use super::{
    find_smoothing_subspace, holder_lift, sift_on, unbalance, LiftContext, LiftOutcome,
    SiftResult, Subspace,
};

/// Search limits for one increment step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepConfig {
    pub codim_max: usize,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum IncrementOutcome {
    NearUniform {
        inner: f64,
    },
    /// `|A ∩ (x + V)| / |V| = new_density ≥ (1 + ε/c_inc) α`.
    Increment {
        subspace: Subspace,
        translate: usize,
        new_density: f64,
        required: f64,
        p: u32,
        p_prime: u32,
        sift: SiftResult,
        smoothed: f64,
    },
}

/// Densest coset of `V` in `A`: `(x, |A ∩ (x + V)| / |V|)` with the smallest
/// representative `x` among ties.
pub fn densest_coset(a: &GSet, v: &Subspace) -> (usize, f64) {
    let g = a.group();
    let q = g.orders()[0] as usize;
    let cosets = q.pow(v.codim() as u32);
    let mut count = vec![0usize; cosets];
    let mut rep = vec![usize::MAX; cosets];
    for x in 0..g.size() {
        let l = v
            .syndrome(x)
            .iter()
            .fold(0usize, |acc, &d| acc * q + d as usize);
        rep[l] = rep[l].min(x);
        if a.contains(x) {
            count[l] += 1;
        }
    }
    let vsize = g.size() / cosets;
    let best = (0..cosets)
        .max_by(|&i, &j| count[i].cmp(&count[j]).then(rep[j].cmp(&rep[i])))
        .expect("at least one coset");
    (rep[best], count[best] as f64 / vsize as f64)
}

/// Hölder lifting, unbalancing, sifting onto `S = {μ_A ∘ μ_A ≥ 1 + ε/8}` and
/// a subspace search, ending in a certified density increment.
pub fn density_increment_step(
    a: &GSet,
    c: &GSet,
    eps: f64,
    cfg: &StepConfig,
    k: &Constants,
) -> Result<IncrementOutcome> {
    let g = a.group();
    match g.vector_space_prime() {
        Some(q) if q % 2 == 1 => {}
        _ => return Err(KmError::NotVectorSpace(alloc::format!("{g}"))),
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(KmError::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    let p = match holder_lift(a, c, eps, LiftContext::Global, k)? {
        LiftOutcome::NearUniform { inner, .. } => return Ok(IncrementOutcome::NearUniform { inner }),
        LiftOutcome::Lp { p, .. } => p,
    };
    let mu_a = super::mu(a)?;
    let gg = diffconv(mu_a.func(), mu_a.func())?;
    let f = gg.add_constant(-1.0);
    let ub = unbalance(&f, None, eps / 2.0, p, k.k_unb)?;
    let s = GSet::from_fn(g, |x| gg.value(x) >= 1.0 + eps / 8.0);
    let delta = eps / 32.0;
    let eps_s = 1.0 - (1.0 + eps / 8.0) / (1.0 + eps / 4.0);
    let p_sift = ub.p_prime + num::ceil(num::ln(2.0 / delta) / eps_s) as u32;
    let full = GSet::full(g);
    let sr = sift_on(a, &full, &full, &s, p_sift, delta, cfg.trials, cfg.seed)?;
    let sm = find_smoothing_subspace(&sr.drc.a1, &sr.drc.a2, &s, eps / 32.0, cfg.codim_max)?;
    let (translate, new_density) = densest_coset(a, &sm.found);
    let required = (1.0 + eps / k.c_inc) * a.density();
    if new_density < required {
        return Err(KmError::ConstantBusting {
            constant: "c_inc".into(),
            detail: alloc::format!("density {new_density:.6} below required {required:.6}"),
        });
    }
    Ok(IncrementOutcome::Increment {
        subspace: sm.found,
        translate,
        new_density,
        required,
        p,
        p_prime: ub.p_prime,
        sift: sr,
        smoothed: sm.smoothed,
    })
}

/// Recomputes `‖1_A * μ_V‖_∞` directly from a convolution.
pub fn increment_value(a: &GSet, v: &Subspace) -> Result<f64> {
    let c = crate::func::conv(&FuncR::indicator(a), v.bohr.measure().func())?;
    Ok(c.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn cfg() -> StepConfig {
        StepConfig {
            codim_max: 2,
            trials: 20_000,
            seed: 1,
        }
    }

    #[test]
    fn whole_group_is_near_uniform() {
        let g = Group::parse("F3^2").unwrap();
        let a = GSet::full(&g);
        let c = a.dilate(2).unwrap();
        let out = density_increment_step(&a, &c, 0.25, &cfg(), &Constants::default()).unwrap();
        assert!(matches!(out, IncrementOutcome::NearUniform { .. }));
    }

    #[test]
    fn two_cosets_of_a_line() {
        let g = Group::parse("F3^2").unwrap();
        // V = {(0, t)}, A = V ∪ (V + (1, 0))
        let a = GSet::from_indices(&g, [0, 1, 2, 3, 4, 5]);
        let c = a.dilate(2).unwrap();
        match density_increment_step(&a, &c, 0.2, &cfg(), &Constants::default()).unwrap() {
            IncrementOutcome::Increment {
                subspace,
                new_density,
                ..
            } => {
                assert_eq!(new_density, 1.0);
                assert!((increment_value(&a, &subspace).unwrap() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
