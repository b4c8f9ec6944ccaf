use crate::bohr::BohrSet;
use crate::constants::Constants;
use crate::fourier::spectral_min;
use crate::func::{diffconv, lp_norm_wrt, ProbMeasure};
use crate::set::GSet;
use crate::{KmError, Result};

use super::unbalance::{smallest_exponent, unbalance_bound};
use super::{ge, mu};

/// `μ_{B3} ∘ μ_{B3} * μ_{B4} ∘ μ_{B4}`, a measure with nonnegative spectrum.
pub fn posdef_measure(b3: &BohrSet, b4: &BohrSet) -> Result<ProbMeasure> {
    let m3 = b3.measure();
    let m4 = b4.measure();
    m3.diffconv(&m3)?.conv(&m4.diffconv(&m4)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOrthOutcome {
    /// Smallest `p'` with `‖μ_A ∘ μ_A‖_{p'(ν)} ≥ (1 + ε/4) μ(B)⁻¹`.
    pub p_prime: u32,
    pub norm: f64,
    pub target: f64,
    pub bound: u32,
    /// `‖(μ_A - μ_B) ∘ (μ_A - μ_B)‖_{p(ν)}`.
    pub start_norm: f64,
}

/// Unbalancing relative to a regular Bohr set `B ⊇ A` and a measure `ν`
/// with nonnegative spectrum supported on `B_ρ`, `ρ = c_narrow · ε α / d`.
pub fn lp_orth(
    a: &GSet,
    b: &BohrSet,
    nu: &ProbMeasure,
    eps: f64,
    p: u32,
    k: &Constants,
) -> Result<LpOrthOutcome> {
    if !a.is_subset(b.members()) {
        return Err(KmError::Hypothesis("A is not inside B".into()));
    }
    if !b.regularity().is_regular() && !b.is_regular(k.reg_const).is_regular() {
        return Err(KmError::Hypothesis("B is not regular".into()));
    }
    let alpha = a.density_in(b.members());
    let rho = k.c_narrow * eps * alpha / b.rank() as f64;
    let narrow = b.dilate(rho)?;
    if !nu.support().is_subset(narrow.members()) {
        return Err(KmError::Hypothesis(alloc::format!(
            "measure is not supported on B_rho, rho = {rho:.3e}"
        )));
    }
    let sm = spectral_min(nu.func()).min_re;
    if sm < -1e-8 {
        return Err(KmError::Hypothesis(alloc::format!(
            "measure has negative Fourier coefficient {sm:.3e}"
        )));
    }
    let target = 1.0 / b.density();
    let mu_a = mu(a)?;
    let d = mu_a.func().sub(b.measure().func())?;
    let start_norm = lp_norm_wrt(&diffconv(&d, &d)?, p as f64, Some(nu))?;
    if !ge(start_norm, eps * target) {
        return Err(KmError::Precondition(alloc::format!(
            "balanced norm {start_norm:.6e} below eps/mu(B) = {:.6e}",
            eps * target
        )));
    }
    let g = diffconv(mu_a.func(), mu_a.func())?;
    let want = (1.0 + eps / 4.0) * target;
    let p_prime = smallest_exponent(&g, Some(nu), want)?;
    let bound = unbalance_bound(eps, p, k.k_unb);
    let norm = lp_norm_wrt(&g, p_prime as f64, Some(nu))?;
    if p_prime > bound {
        return Err(KmError::ConstantBusting {
            constant: "k_unb".into(),
            detail: alloc::format!("p' = {p_prime} exceeds bound {bound}"),
        });
    }
    Ok(LpOrthOutcome {
        p_prime,
        norm,
        target,
        bound,
        start_norm,
    })
}
