use alloc::vec;
use alloc::vec::Vec;

use crate::func::{diffconv, inner_wrt, lp_norm_wrt, FuncR, ProbMeasure};
use crate::num;
use crate::rng;
use crate::set::GSet;
use crate::{KmError, Result};

use super::{ge, mu};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DrcMode {
    /// Shift sets of size at most `p` in order of size, then
    /// lexicographically; `budget` caps the number of sets examined.
    Exhaustive { budget: u64 },
    /// Uniform shift vectors in `G^p`.
    Sampled { trials: u64, seed: u64 },
}

/// Shifts `s` with `A_i = B_i ∩ (A + s_1) ∩ ⋯ ∩ (A + s_p)` satisfying
/// `⟨μ_{A1} ∘ μ_{A2}, f⟩ ≤ f_bound` and
/// `μ_{B1}(A1) · μ_{B2}(A2) ≥ density_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct DrcResult {
    pub shifts: Vec<usize>,
    pub a1: GSet,
    pub a2: GSet,
    pub f_value: f64,
    pub f_bound: f64,
    pub densities: (f64, f64),
    pub density_bound: f64,
    pub p: u32,
    pub examined: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SiftResult {
    pub drc: DrcResult,
    pub s: GSet,
    /// `⟨μ_{A1} ∘ μ_{A2}, 1_S⟩`.
    pub inner_value: f64,
    pub delta: f64,
}

struct Problem<'a> {
    a: &'a GSet,
    b1: &'a GSet,
    b2: &'a GSet,
    f: &'a FuncR,
    f_bound: f64,
    density_bound: f64,
    extra: Option<(&'a GSet, f64)>,
}

struct Best {
    density: f64,
    inner: f64,
}

impl Problem<'_> {
    fn cut(&self, shifts: &[usize]) -> (GSet, GSet) {
        let mut a1 = self.b1.clone();
        let mut a2 = self.b2.clone();
        for &s in shifts {
            let t = self.a.translate(s);
            a1 = a1.intersection(&t);
            a2 = a2.intersection(&t);
        }
        (a1, a2)
    }

    fn densities(&self, a1: &GSet, a2: &GSet) -> (f64, f64) {
        (a1.density_in(self.b1), a2.density_in(self.b2))
    }

    /// `Ok(Some(_))` on success, `Ok(None)` when the densities pass but `f`
    /// does not, `Err(())` when the densities already fail.
    fn test(&self, shifts: &[usize], best: &mut Best) -> core::result::Result<Option<DrcResult>, ()> {
        let (a1, a2) = self.cut(shifts);
        let dens = self.densities(&a1, &a2);
        let prod = dens.0 * dens.1;
        best.density = best.density.max(prod - self.density_bound);
        if a1.is_empty() || a2.is_empty() || !ge(prod, self.density_bound) {
            return Err(());
        }
        let h = diffconv(mu(&a1).unwrap().func(), mu(&a2).unwrap().func()).unwrap();
        let f_value = inner_wrt(&h, self.f, None).unwrap();
        let mut ok = f_value <= self.f_bound + 1e-12 * self.f_bound.abs().max(1.0);
        if let Some((s, delta)) = self.extra {
            let inner = inner_wrt(&h, &FuncR::indicator(s), None).unwrap();
            best.inner = best.inner.max(inner - (1.0 - delta));
            ok &= ge(inner, 1.0 - delta);
        }
        if !ok {
            return Ok(None);
        }
        Ok(Some(DrcResult {
            shifts: shifts.to_vec(),
            a1,
            a2,
            f_value,
            f_bound: self.f_bound,
            densities: dens,
            density_bound: self.density_bound,
            p: 0,
            examined: 0,
        }))
    }
}

/// Bounds of the dependent-random-choice lemma for `μ = μ_{B1} ∘ μ_{B2}`:
/// `2⟨g^p, f⟩_μ / ‖g‖^p_{p(μ)}` and `¼ (α ‖g‖_{p(μ)})^{2p}` with
/// `g = μ_A ∘ μ_A`.
fn bounds(a: &GSet, b1: &GSet, b2: &GSet, p: u32, f: &FuncR) -> Result<(f64, f64)> {
    let mu_a = mu(a)?;
    let g = diffconv(mu_a.func(), mu_a.func())?;
    let m = ProbMeasure::new(diffconv(mu(b1)?.func(), mu(b2)?.func())?)?;
    let top = (0..g.group().size())
        .filter(|&i| m.func().value(i) > 0.0)
        .map(|i| g.value(i))
        .fold(0.0, f64::max);
    if top == 0.0 {
        return Ok((0.0, 0.0));
    }
    let pf = p as f64;
    let (mut num_s, mut den_s) = (0.0, 0.0);
    for i in 0..g.group().size() {
        let w = m.func().value(i);
        if w > 0.0 {
            let t = w * num::powf(g.value(i) / top, pf);
            num_s += t * f.value(i);
            den_s += t;
        }
    }
    let f_bound = 2.0 * num_s / den_s;
    let norm = lp_norm_wrt(&g, pf, Some(&m))?;
    let log_d = 2.0 * pf * num::ln(a.density() * norm) - num::ln(4.0);
    Ok((f_bound, libm::exp(log_d)))
}

fn search(prob: &Problem, p: u32, mode: DrcMode) -> Result<DrcResult> {
    let n = prob.a.group().size();
    let mut best = Best {
        density: f64::NEG_INFINITY,
        inner: f64::NEG_INFINITY,
    };
    let mut examined = 0u64;
    let finish = |mut r: DrcResult, examined: u64| {
        r.p = p;
        r.examined = examined;
        // a shift set T stands for the vector that repeats its last element
        while r.shifts.len() < p as usize {
            let last = *r.shifts.last().expect("nonempty");
            r.shifts.push(last);
        }
        r
    };
    match mode {
        DrcMode::Exhaustive { budget } => {
            let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
            for _size in 1..=(p as usize).min(n) {
                let mut next = Vec::new();
                for t in &frontier {
                    let from = t.last().map_or(0, |&x| x + 1);
                    for s in from..n {
                        if examined >= budget {
                            return Err(exhausted(examined, &best));
                        }
                        examined += 1;
                        let mut cand = t.clone();
                        cand.push(s);
                        match prob.test(&cand, &mut best) {
                            Ok(Some(r)) => return Ok(finish(r, examined)),
                            Ok(None) => next.push(cand),
                            Err(()) => {}
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                frontier = next;
            }
            Err(exhausted(examined, &best))
        }
        DrcMode::Sampled { trials, seed } => {
            let mut r = rng::seeded(seed, 0);
            let mut shifts = vec![0usize; p as usize];
            for _ in 0..trials {
                examined += 1;
                for s in shifts.iter_mut() {
                    *s = rng::below(&mut r, n);
                }
                if let Ok(Some(mut res)) = prob.test(&shifts, &mut best) {
                    res.shifts = shifts.clone();
                    res.p = p;
                    res.examined = examined;
                    return Ok(res);
                }
            }
            Err(exhausted(examined, &best))
        }
    }
}

fn exhausted(tried: u64, best: &Best) -> KmError {
    KmError::SiftExhausted {
        tried,
        best_density_margin: best.density,
        best_inner_margin: best.inner,
    }
}

fn check_inputs(a: &GSet, b1: &GSet, b2: &GSet, p: u32) -> Result<()> {
    if a.is_empty() || b1.is_empty() || b2.is_empty() {
        return Err(KmError::EmptySet);
    }
    crate::group::check_same(a.group(), b1.group())?;
    crate::group::check_same(a.group(), b2.group())?;
    if p == 0 {
        return Err(KmError::InvalidArgument("p must be at least 1".into()));
    }
    Ok(())
}

/// Dependent random choice for a nonnegative `f`.
pub fn drc(a: &GSet, b1: &GSet, b2: &GSet, p: u32, f: &FuncR, mode: DrcMode) -> Result<DrcResult> {
    check_inputs(a, b1, b2, p)?;
    let (f_bound, density_bound) = bounds(a, b1, b2, p, f)?;
    let prob = Problem {
        a,
        b1,
        b2,
        f,
        f_bound,
        density_bound,
        extra: None,
    };
    search(&prob, p, mode)
}

/// Sifting onto a given `S`: runs the shift search with `f = 1_{G \ S}` at
/// exponent `p` and additionally requires `⟨μ_{A1} ∘ μ_{A2}, 1_S⟩ ≥ 1 - δ`.
/// The exhaustive scan gets `trials` sets; sampling with `seed` follows.
#[allow(clippy::too_many_arguments)]
pub fn sift_on(
    a: &GSet,
    b1: &GSet,
    b2: &GSet,
    s: &GSet,
    p: u32,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<SiftResult> {
    check_inputs(a, b1, b2, p)?;
    let f = FuncR::indicator(&s.complement());
    let (f_bound, density_bound) = bounds(a, b1, b2, p, &f)?;
    let prob = Problem {
        a,
        b1,
        b2,
        f: &f,
        f_bound,
        density_bound,
        extra: Some((s, delta)),
    };
    let res = match search(&prob, p, DrcMode::Exhaustive { budget: trials }) {
        Ok(r) => Ok(r),
        Err(KmError::SiftExhausted { .. }) => search(&prob, p, DrcMode::Sampled { trials, seed }),
        Err(e) => Err(e),
    }?;
    let inner_value = 1.0 - res.f_value;
    Ok(SiftResult {
        drc: res,
        s: s.clone(),
        inner_value,
        delta,
    })
}

/// `S = {x : μ_A ∘ μ_A(x) > (1 - ε) ‖μ_A ∘ μ_A‖_{p(μ)}}`, then sifting at
/// the raised exponent `p + ⌈ε⁻¹ ln(2/δ)⌉`.
#[allow(clippy::too_many_arguments)]
pub fn sift(
    a: &GSet,
    b1: &GSet,
    b2: &GSet,
    p: u32,
    eps: f64,
    delta: f64,
    trials: u64,
    seed: u64,
) -> Result<SiftResult> {
    check_inputs(a, b1, b2, p)?;
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(KmError::InvalidArgument("need eps, delta in (0, 1)".into()));
    }
    let mu_a = mu(a)?;
    let g = diffconv(mu_a.func(), mu_a.func())?;
    let m = ProbMeasure::new(diffconv(mu(b1)?.func(), mu(b2)?.func())?)?;
    let norm = lp_norm_wrt(&g, p as f64, Some(&m))?;
    let thr = (1.0 - eps) * norm;
    let s = GSet::from_fn(a.group(), |x| g.value(x) > thr);
    let p_eff = p + num::ceil(num::ln(2.0 / delta) / eps) as u32;
    sift_on(a, b1, b2, &s, p_eff, delta, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn whole_group_keeps_b() {
        let g = Group::cyclic(5).unwrap();
        let full = GSet::full(&g);
        let r = drc(&full, &full, &full, 2, &FuncR::zero(&g), DrcMode::Exhaustive { budget: 100 }).unwrap();
        assert_eq!(r.a1, full);
        assert_eq!(r.a2, full);
        assert_eq!(r.shifts.len(), 2);
    }

    #[test]
    fn z7_interval_meets_bounds() {
        let g = Group::cyclic(7).unwrap();
        let full = GSet::full(&g);
        let a = GSet::from_indices(&g, [0, 1, 2]);
        let r = drc(&a, &full, &full, 2, &FuncR::zero(&g), DrcMode::Exhaustive { budget: 1000 }).unwrap();
        assert!(r.densities.0 * r.densities.1 >= r.density_bound);
        assert!(r.a1.is_subset(&a.translate(r.shifts[0])));
        let sr = sift(&a, &full, &full, 2, 0.25, 0.25, 10_000, 1).unwrap();
        assert!(sr.inner_value >= 0.75);
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let g = Group::cyclic(7).unwrap();
        let full = GSet::full(&g);
        let a = GSet::from_indices(&g, [0, 1, 2, 4]);
        let f = FuncR::indicator(&GSet::from_indices(&g, [3]));
        let mode = DrcMode::Sampled { trials: 500, seed: 9 };
        let x = drc(&a, &full, &full, 2, &f, mode).unwrap();
        let y = drc(&a, &full, &full, 2, &f, mode).unwrap();
        assert_eq!(x, y);
    }
}
