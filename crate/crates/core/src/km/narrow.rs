use crate::bohr::BohrSet;
use crate::constants::Constants;
use crate::func::{conv, FuncR};
use crate::set::GSet;
use crate::{KmError, Result};

use super::ge;

#[derive(Clone, Debug, PartialEq)]
pub enum NarrowOutcome {
    /// `μ_{B'}(A - x) ≥ (1-ε)α` and `μ_{B''}(A - x) ≥ (1-ε)α`.
    Translate { x: usize, d1: f64, d2: f64 },
    /// `‖1_A * μ_{B'}‖_∞ ≥ (1 + ε/2) α`, attained at `x`.
    IncOnBPrime { x: usize, density: f64 },
    /// The same for `B''`.
    IncOnBDoublePrime { x: usize, density: f64 },
}

fn first_max(f: &FuncR) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in f.values().iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Evaluates the three alternatives of the narrowing lemma for `A ⊆ B` and
/// `B', B'' ⊆ B_ρ`, `ρ = c_narrow · α ε / d`, returning the first that holds.
pub fn bour_narrow(
    a: &GSet,
    b: &BohrSet,
    b1: &BohrSet,
    b2: &BohrSet,
    eps: f64,
    k: &Constants,
) -> Result<NarrowOutcome> {
    if !a.is_subset(b.members()) {
        return Err(KmError::Hypothesis("A is not inside B".into()));
    }
    if !b.regularity().is_regular() && !b.is_regular(k.reg_const).is_regular() {
        return Err(KmError::Hypothesis("B is not regular".into()));
    }
    let alpha = a.density_in(b.members());
    let rho = k.c_narrow * alpha * eps / b.rank() as f64;
    let narrow = b.dilate(rho)?;
    if !b1.members().is_subset(narrow.members()) || !b2.members().is_subset(narrow.members()) {
        return Err(KmError::Hypothesis(alloc::format!(
            "B' and B'' must lie in B_rho, rho = {rho:.3e}"
        )));
    }
    let ind = FuncR::indicator(a);
    // (1_A * μ_{B'})(x) = |A ∩ (x + B')| / |B'| = μ_{B'}(A - x) by symmetry
    let d1 = conv(&ind, b1.measure().func())?;
    let d2 = conv(&ind, b2.measure().func())?;
    let need = (1.0 - eps) * alpha;
    for x in 0..a.group().size() {
        if ge(d1.value(x), need) && ge(d2.value(x), need) {
            return Ok(NarrowOutcome::Translate {
                x,
                d1: d1.value(x),
                d2: d2.value(x),
            });
        }
    }
    let up = (1.0 + eps / 2.0) * alpha;
    let (x, m1) = first_max(&d1);
    if ge(m1, up) {
        return Ok(NarrowOutcome::IncOnBPrime { x, density: m1 });
    }
    let (x, m2) = first_max(&d2);
    if ge(m2, up) {
        return Ok(NarrowOutcome::IncOnBDoublePrime { x, density: m2 });
    }
    Err(KmError::TrichotomyFailure(alloc::format!(
        "no translate and no increment (max densities {m1:.6}, {m2:.6} vs alpha {alpha:.6})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn full_bohr_set_translates_at_zero() {
        let g = Group::cyclic(101).unwrap();
        let k = Constants::default();
        let (_, b) = BohrSet::new(&g, alloc::vec![1], alloc::vec![1.0])
            .unwrap()
            .regular_dilate(k.reg_const)
            .unwrap();
        let rho = k.c_narrow * 0.5 / 1.0;
        let b1 = b.dilate(rho).unwrap();
        let b2 = b1.dilate(0.5).unwrap();
        let out = bour_narrow(b.members(), &b, &b1, &b2, 0.5, &k).unwrap();
        assert_eq!(out, NarrowOutcome::Translate { x: 0, d1: 1.0, d2: 1.0 });
    }

    #[test]
    fn wide_b_prime_violates_hypothesis() {
        let g = Group::cyclic(101).unwrap();
        let k = Constants::default();
        let (_, b) = BohrSet::new(&g, alloc::vec![1], alloc::vec![1.0])
            .unwrap()
            .regular_dilate(k.reg_const)
            .unwrap();
        let out = bour_narrow(b.members(), &b, &b, &b, 0.5, &k);
        assert!(matches!(out, Err(KmError::Hypothesis(_))));
    }
}
