use crate::fourier::spectral_min;
use crate::func::{lp_norm_wrt, FuncR, ProbMeasure};
use crate::num;
use crate::{KmError, Result};

use super::ge;

/// Exponents beyond this are never searched.
const HARD_CAP: u32 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct UnbalanceOutcome {
    /// Smallest `p'` with `‖f + 1‖_{p'(ν)} ≥ 1 + ε/2`.
    pub p_prime: u32,
    pub norm: f64,
    /// `‖f + 1‖_{(p'-1)(ν)}`, or `None` when `p' = 1`.
    pub norm_below: Option<f64>,
    pub bound: u32,
}

/// `⌈k_unb · ε⁻¹ ln(e/ε) · p⌉`.
pub fn unbalance_bound(eps: f64, p: u32, k_unb: f64) -> u32 {
    let v = k_unb / eps * (1.0 - num::ln(eps)) * p as f64;
    num::ceil(v).min(HARD_CAP as f64) as u32
}

/// Smallest `q ≥ 1` with `‖g‖_{q(ν)} ≥ want`; the norms increase with `q`,
/// so this scans, then doubles, then bisects.
pub(crate) fn smallest_exponent(g: &FuncR, nu: Option<&ProbMeasure>, want: f64) -> Result<u32> {
    let norm = |q: u32| lp_norm_wrt(g, q as f64, nu);
    if lp_norm_wrt(g, f64::INFINITY, nu)? < want {
        return Err(KmError::ConstantBusting {
            constant: "k_unb".into(),
            detail: alloc::format!("sup norm is below the target {want:.6e}"),
        });
    }
    let mut lo = 0u32;
    let mut hi = 1u32;
    while !ge(norm(hi)?, want) {
        lo = hi;
        hi = if hi < 64 { hi + 1 } else { hi.saturating_mul(2).min(HARD_CAP) };
        if lo == HARD_CAP {
            return Err(KmError::ConstantBusting {
                constant: "k_unb".into(),
                detail: alloc::format!("no exponent up to {HARD_CAP} reaches {want:.6e}"),
            });
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ge(norm(mid)?, want) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// For `f` and `ν` with nonnegative spectra and `‖f‖_{p(ν)} ≥ ε`, finds the
/// smallest `p'` with `‖f + 1‖_{p'(ν)} ≥ 1 + ε/2`.
pub fn unbalance(
    f: &FuncR,
    nu: Option<&ProbMeasure>,
    eps: f64,
    p: u32,
    k_unb: f64,
) -> Result<UnbalanceOutcome> {
    if !(eps > 0.0 && eps < 1.0) || p == 0 {
        return Err(KmError::InvalidArgument(alloc::format!(
            "need 0 < eps < 1 and p >= 1 (eps = {eps}, p = {p})"
        )));
    }
    let sf = spectral_min(f).min_re;
    if sf < -1e-8 {
        return Err(KmError::Precondition(alloc::format!(
            "f has negative Fourier coefficient {sf:.3e}"
        )));
    }
    if let Some(m) = nu {
        let sm = spectral_min(m.func()).min_re;
        if sm < -1e-8 {
            return Err(KmError::Precondition(alloc::format!(
                "measure has negative Fourier coefficient {sm:.3e}"
            )));
        }
    }
    let base = lp_norm_wrt(f, p as f64, nu)?;
    if !ge(base, eps) {
        return Err(KmError::Precondition(alloc::format!(
            "‖f‖_p = {base:.6e} < eps = {eps}"
        )));
    }
    let g = f.add_constant(1.0);
    let want = 1.0 + eps / 2.0;
    let bound = unbalance_bound(eps, p, k_unb);
    let p_prime = smallest_exponent(&g, nu, want)?;
    let norm = |q: u32| lp_norm_wrt(&g, q as f64, nu);
    let out = UnbalanceOutcome {
        p_prime,
        norm: norm(p_prime)?,
        norm_below: if p_prime > 1 { Some(norm(p_prime - 1)?) } else { None },
        bound,
    };
    if p_prime > bound {
        return Err(KmError::ConstantBusting {
            constant: "k_unb".into(),
            detail: alloc::format!("p' = {p_prime} exceeds bound {bound} (eps = {eps}, p = {p})"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{diffconv, mu_of_set};
    use crate::group::Group;
    use crate::set::GSet;

    #[test]
    fn z5_example() {
        let g = Group::cyclic(5).unwrap();
        let mu = mu_of_set(&GSet::from_indices(&g, [0, 1])).unwrap();
        let f = diffconv(mu.func(), mu.func()).unwrap().add_constant(-1.0);
        let out = unbalance(&f, None, 0.8, 1, 4.0).unwrap();
        assert_eq!(out.p_prime, 3);
        assert!((libm::pow(out.norm, 3.0) - 3.90625).abs() < 1e-9);
        assert!(out.norm_below.unwrap() < 1.4);
    }

    #[test]
    fn already_large_returns_first_hit() {
        let g = Group::cyclic(5).unwrap();
        let mu = mu_of_set(&GSet::from_indices(&g, [0])).unwrap();
        let f = diffconv(mu.func(), mu.func()).unwrap().add_constant(-1.0);
        let out = unbalance(&f, None, 0.5, 2, 4.0).unwrap();
        assert!(out.p_prime <= 2);
    }

    #[test]
    fn zero_function_rejected() {
        let g = Group::cyclic(5).unwrap();
        let f = FuncR::zero(&g);
        assert!(matches!(unbalance(&f, None, 0.5, 1, 4.0), Err(KmError::Precondition(_))));
    }
}
