use km_core::fourier::spectral_min;
use km_core::func::{conv, diffconv, inner_wrt, lp_norm_wrt, mu_of_set};
use km_core::km::{
    bour_narrow, density_increment_step, drc as drc_search, holder_lift, increment_value,
    lp_orth as lp_orth_step, posdef_measure, sift, unbalance, unbalance_bound, DrcMode,
    IncrementOutcome, LiftContext, LiftOutcome, NarrowOutcome, StepConfig,
};
use km_core::{BohrSet, Constants, FuncR, GSet, Group, KmError, ProbMeasure};
use serde_json::{json, Value};

use super::gen;
use super::{bohr_json, set_json, Instance, Source};

/// Relative slack on recomputed certificate thresholds.
const TOL: f64 = 1e-9;

fn ge_margin(value: f64, bound: f64) -> f64 {
    (value - bound) / bound.abs().max(1.0) + TOL
}

fn err_json(e: &KmError) -> Value {
    Value::String(e.to_string())
}

pub(super) fn unbalancing(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let z = Group::cyclic(11).expect("Z11");
    let a = gen::set(rng, &z, 0.05, 0.95);
    let m = mu_of_set(&a).ok()?;
    let f = diffconv(m.func(), m.func()).ok()?.add_constant(-1.0);
    let p = gen::range(rng, 1, 6) as u32;
    let norm = lp_norm_wrt(&f, p as f64, None).ok()?;
    let eps = (norm * gen::real(rng, 0.2, 1.0)).min(0.95);
    if eps.is_nan() || eps <= 1e-3 {
        return None;
    }
    let payload = json!({ "set": set_json(&a), "p": p, "eps": eps });
    let out = match unbalance(&f, None, eps, p, k.k_unb) {
        Ok(o) => o,
        Err(KmError::ConstantBusting { detail, .. }) => {
            return Some(Instance::new(-1.0, json!({ "input": payload, "error": detail })))
        }
        Err(_) => return None,
    };
    // the certificate recomputed from scratch
    let g = f.add_constant(1.0);
    let want = 1.0 + eps / 2.0;
    let at = lp_norm_wrt(&g, out.p_prime as f64, None).ok()?;
    let mut margin = ge_margin(at, want);
    if out.p_prime > 1 {
        let below = lp_norm_wrt(&g, (out.p_prime - 1) as f64, None).ok()?;
        margin = margin.min((want - below) / want + TOL);
    }
    let bound = unbalance_bound(eps, p, k.k_unb);
    margin = margin.min((bound as f64 - out.p_prime as f64) / bound as f64);
    let scale = (1.0 - eps.ln()) / eps * p as f64;
    Some(
        Instance::new(margin, json!({ "input": payload, "p_prime": out.p_prime, "bound": bound }))
            .with_const("k_unb", out.p_prime as f64 / scale),
    )
}

/// Sets of `Z5` then `Z7`, each with `p = 1` and `p = 2`.
pub(super) const DRC_ITEMS: usize = 2 * gen::SMALL_SUBSETS;

struct DrcInput {
    a: GSet,
    b1: GSet,
    b2: GSet,
    p: u32,
    f: FuncR,
}

fn drc_input(src: Source) -> DrcInput {
    match src {
        Source::Item(i) => {
            let a = gen::small_subset(i / 2);
            let g = a.group().clone();
            let f = FuncR::new(&g, (0..g.size()).map(|x| (x % 3) as f64).collect()).expect("length");
            DrcInput {
                b1: GSet::full(&g),
                b2: GSet::full(&g),
                a,
                p: 1 + (i % 2) as u32,
                f,
            }
        }
        Source::Random(rng) => {
            let g = gen::group(rng, &["Z5", "Z7", "Z8", "Z9", "Z11", "Z3^2", "Z2^4", "Z13"]);
            let f = FuncR::new(&g, (0..g.size()).map(|_| gen::real(rng, 0.0, 1.0)).collect())
                .expect("length");
            DrcInput {
                a: gen::set(rng, &g, 0.2, 0.8),
                b1: gen::set(rng, &g, 0.5, 1.0),
                b2: gen::set(rng, &g, 0.5, 1.0),
                p: gen::range(rng, 1, 2) as u32,
                f,
            }
        }
    }
}

fn cut(inp: &DrcInput, shifts: &[usize]) -> (GSet, GSet) {
    let mut a1 = inp.b1.clone();
    let mut a2 = inp.b2.clone();
    for &s in shifts {
        let t = inp.a.translate(s);
        a1 = a1.intersection(&t);
        a2 = a2.intersection(&t);
    }
    (a1, a2)
}

/// Every tuple in `G^p`, lexicographically.
fn tuples(n: usize, p: u32) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(p)).map(move |mut t| {
        let mut v = vec![0; p as usize];
        for slot in v.iter_mut().rev() {
            *slot = t % n;
            t /= n;
        }
        v
    })
}

/// `⟨μ_{A1} ∘ μ_{A2}, f⟩`, or `None` when either set is empty.
fn pairing(a1: &GSet, a2: &GSet, f: &FuncR) -> Option<f64> {
    let h = diffconv(mu_of_set(a1).ok()?.func(), mu_of_set(a2).ok()?.func()).ok()?;
    inner_wrt(&h, f, None).ok()
}

/// Some difference of `A` lies in `B2 - B1`, so the weighted norm is positive.
fn overlaps(inp: &DrcInput) -> bool {
    let g = inp.a.group();
    inp.b1.iter().any(|y| {
        inp.b2.iter().any(|z| {
            let d = g.sub(z, y);
            inp.a.iter().any(|x| inp.a.contains(g.add(x, d)))
        })
    })
}

pub(super) fn drc_identity(_: &Constants, src: Source) -> Option<Instance> {
    let inp = drc_input(src);
    let g = inp.a.group().clone();
    let n = g.size();
    let (alpha, beta1, beta2) = (inp.a.density(), inp.b1.density(), inp.b2.density());
    let mut lhs = 0.0;
    for s in tuples(n, inp.p) {
        let (a1, a2) = cut(&inp, &s);
        let h = diffconv(&FuncR::indicator(&a1), &FuncR::indicator(&a2)).ok()?;
        lhs += inner_wrt(&h, &inp.f, None).ok()?;
    }
    lhs /= n.pow(inp.p) as f64;
    let ma = mu_of_set(&inp.a).ok()?;
    let gg = diffconv(ma.func(), ma.func()).ok()?;
    let mu = ProbMeasure::new(
        diffconv(mu_of_set(&inp.b1).ok()?.func(), mu_of_set(&inp.b2).ok()?.func()).ok()?,
    )
    .ok()?;
    let gp = gg.map(|v| v.powi(inp.p as i32));
    let rhs = beta1 * beta2 * alpha.powi(2 * inp.p as i32) * inner_wrt(&gp, &inp.f, Some(&mu)).ok()?;
    let mut margin = 1e-10 * rhs.abs().max(1.0) - (lhs - rhs).abs();

    // the selection inequalities, with bounds recomputed here
    let norm = lp_norm_wrt(&gg, inp.p as f64, Some(&mu)).ok()?;
    if norm == 0.0 {
        // no difference of A lands in B1 - B2
        return None;
    }
    let ratio = inner_wrt(&gp, &inp.f, Some(&mu)).ok()? / norm.powi(inp.p as i32);
    let f_bound = 2.0 * ratio;
    let density_bound = alpha.powi(2 * inp.p as i32) * norm.powi(2 * inp.p as i32) / 4.0;
    let payload = json!({
        "a": set_json(&inp.a), "b1": inp.b1.to_vec(), "b2": inp.b2.to_vec(), "p": inp.p,
        "f": inp.f.values(), "lhs": lhs, "rhs": rhs,
    });
    match drc_search(&inp.a, &inp.b1, &inp.b2, inp.p, &inp.f, DrcMode::Exhaustive { budget: 1 << 20 }) {
        Ok(r) => {
            let (a1, a2) = cut(&inp, &r.shifts);
            if a1 != r.a1 || a2 != r.a2 {
                margin = -1.0;
            }
            let d = a1.density_in(&inp.b1) * a2.density_in(&inp.b2);
            margin = margin.min(ge_margin(d, density_bound));
            if let Some(v) = pairing(&a1, &a2, &inp.f) {
                margin = margin.min(ge_margin(f_bound, v));
            } else {
                margin = -1.0;
            }
            Some(Instance::new(margin, payload))
        }
        Err(e) => Some(Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) }))),
    }
}

pub(super) fn sifting(_: &Constants, src: Source) -> Option<Instance> {
    let inp = drc_input(src);
    let (eps, delta) = (0.5, 0.25);
    if !overlaps(&inp) {
        return None;
    }
    let payload = json!({ "a": set_json(&inp.a), "b1": inp.b1.to_vec(), "b2": inp.b2.to_vec(), "p": inp.p });
    match sift(&inp.a, &inp.b1, &inp.b2, inp.p, eps, delta, 1 << 20, 0) {
        Ok(r) => {
            let (a1, a2) = cut(&inp, &r.drc.shifts);
            let mut margin = if a1 == r.drc.a1 && a2 == r.drc.a2 { f64::INFINITY } else { -1.0 };
            let v = pairing(&a1, &a2, &FuncR::indicator(&r.s)).unwrap_or(f64::NEG_INFINITY);
            margin = margin.min(ge_margin(v, 1.0 - delta));
            Some(
                Instance::new(margin, json!({ "input": payload, "inner": v, "shifts": r.drc.shifts }))
                    .with_count("successes", 1),
            )
        }
        Err(e @ KmError::SiftExhausted { .. }) => Some(
            Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) }))
                .with_count("exhausted", 1),
        ),
        Err(_) => None,
    }
}

fn check_lift(
    out: &LiftOutcome,
    a: &GSet,
    c: &GSet,
    eps: f64,
    u: &FuncR,
    w: Option<&ProbMeasure>,
    target: f64,
) -> Option<f64> {
    let ma = mu_of_set(a).ok()?;
    let mc = mu_of_set(c).ok()?;
    Some(match *out {
        LiftOutcome::NearUniform { .. } => {
            let inner = inner_wrt(&conv(ma.func(), ma.func()).ok()?, mc.func(), None).ok()?;
            ge_margin(eps * target, (inner - target).abs())
        }
        LiftOutcome::Lp { p, .. } => {
            let d = ma.func().sub(u).ok()?;
            let norm = lp_norm_wrt(&conv(&d, &d).ok()?, p as f64, w).ok()?;
            let even = if p % 2 == 0 { f64::INFINITY } else { -1.0 };
            ge_margin(norm, eps / 2.0 * target).min(even)
        }
    })
}

fn lift_kind(out: &LiftOutcome) -> &'static str {
    match out {
        LiftOutcome::NearUniform { .. } => "near_uniform",
        LiftOutcome::Lp { .. } => "lp",
    }
}

pub(super) fn holder(k: &Constants, src: Source) -> Option<Instance> {
    let (a, c, eps) = match src {
        Source::Item(i) => {
            let z = Group::cyclic(7).expect("Z7");
            (gen::mask_set(&z, (i / 127) as u64 + 1), gen::mask_set(&z, (i % 127) as u64 + 1), 0.25)
        }
        Source::Random(rng) => {
            let z = gen::group(rng, &["Z31", "Z64", "Z3^4", "Z101", "Z5^3", "Z257"]);
            (gen::set(rng, &z, 0.05, 0.7), gen::set(rng, &z, 0.02, 0.7), gen::real(rng, 0.05, 0.9))
        }
    };
    let payload = json!({ "a": set_json(&a), "c": c.to_vec(), "eps": eps });
    let out = match holder_lift(&a, &c, eps, LiftContext::Global, k) {
        Ok(o) => o,
        Err(e) => return Some(Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) }))),
    };
    let one = FuncR::constant(a.group(), 1.0);
    let margin = check_lift(&out, &a, &c, eps, &one, None, 1.0)?;
    Some(Instance::new(margin, payload).with_count(lift_kind(&out), 1))
}

pub(super) fn increment(k: &Constants, src: Source) -> Option<Instance> {
    let g = Group::parse("F3^2").expect("F3^2");
    let a = match src {
        Source::Item(i) => gen::mask_set(&g, i as u64 + 1),
        Source::Random(rng) => gen::set(rng, &g, 0.1, 1.0),
    };
    let c = a.dilate(2).ok()?;
    let eps = 0.25;
    let cfg = StepConfig {
        codim_max: 2,
        trials: 20_000,
        seed: 0,
    };
    let payload = json!({ "a": set_json(&a), "eps": eps });
    match density_increment_step(&a, &c, eps, &cfg, k) {
        Ok(IncrementOutcome::NearUniform { .. }) => {
            Some(Instance::new(0.0, payload).with_count("near_uniform", 1))
        }
        Ok(IncrementOutcome::Increment {
            subspace,
            new_density,
            required,
            ..
        }) => {
            let v = increment_value(&a, &subspace).ok()?;
            let replay = if (v - new_density).abs() <= 1e-12 { f64::INFINITY } else { -1.0 };
            let own = (1.0 + eps / k.c_inc) * a.density();
            let margin = ge_margin(v, own).min(ge_margin(v, required)).min(replay);
            Some(
                Instance::new(margin, json!({ "input": payload, "value": v, "codim": subspace.codim() }))
                    .with_count("increments", 1),
            )
        }
        // the step's own search budgets, not a certificate failure
        Err(e) => Some(
            Instance::new(0.0, json!({ "input": payload, "error": err_json(&e) }))
                .with_count("unresolved", 1),
        ),
    }
}

/// A regular `B` with `A ⊆ B` of relative density in a random range.
fn set_in_bohr(rng: &mut km_core::rng::Rng, k: &Constants, lo: u64, hi: u64) -> Option<(BohrSet, GSet)> {
    let b = gen::regular_bohr(rng, lo, hi, 2, k.reg_const)?;
    let d = gen::real(rng, 0.1, 0.9);
    let a = gen::subset(rng, b.members(), d);
    if a.is_empty() {
        return None;
    }
    Some((b, a))
}

pub(super) fn bour(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let (b, a) = set_in_bohr(rng, k, 2000, 10_000)?;
    let eps = gen::real(rng, 0.1, 0.5);
    let alpha = a.density_in(b.members());
    let rho = k.c_narrow * alpha * eps / b.rank() as f64;
    let b1 = gen::regular_narrow(&b, rho, k.reg_const)?;
    let b2 = gen::regular_narrow(&b1, rho, k.reg_const)?;
    let payload = json!({
        "b": bohr_json(&b), "a": a.to_vec(), "eps": eps, "b1": bohr_json(&b1), "b2": bohr_json(&b2),
    });
    let out = match bour_narrow(&a, &b, &b1, &b2, eps, k) {
        Ok(o) => o,
        Err(KmError::Hypothesis(_)) => return None,
        Err(e) => return Some(Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) }))),
    };
    // μ_{B'}(A - x) = |A ∩ (x + B')| / |B'|, counted directly
    let g = a.group();
    let dens = |bb: &BohrSet, x: usize| {
        bb.members().iter().filter(|&y| a.contains(g.add(x, y))).count() as f64 / bb.size() as f64
    };
    let (margin, kind) = match out {
        NarrowOutcome::Translate { x, .. } => {
            let need = (1.0 - eps) * alpha;
            (ge_margin(dens(&b1, x), need).min(ge_margin(dens(&b2, x), need)), "translate")
        }
        NarrowOutcome::IncOnBPrime { x, .. } => (ge_margin(dens(&b1, x), (1.0 + eps / 2.0) * alpha), "inc_b1"),
        NarrowOutcome::IncOnBDoublePrime { x, .. } => {
            (ge_margin(dens(&b2, x), (1.0 + eps / 2.0) * alpha), "inc_b2")
        }
    };
    Some(Instance::new(margin, payload).with_count(kind, 1))
}

pub(super) fn lp_orth(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let (b, a) = set_in_bohr(rng, k, 200, 2000)?;
    let eps = gen::real(rng, 0.05, 0.5);
    let alpha = a.density_in(b.members());
    let d = b.rank() as f64;
    let rho = k.c_narrow * eps * alpha / d;
    let b3 = gen::regular_narrow(&b, rho / 4.0, k.reg_const)?;
    let b4 = gen::regular_narrow(&b3, k.c_cover / d, k.reg_const)?;
    let nu = posdef_measure(&b3, &b4).ok()?;
    let p = 2 * gen::range(rng, 1, 2) as u32;
    let out = match lp_orth_step(&a, &b, &nu, eps, p, k) {
        Ok(o) => o,
        Err(KmError::Precondition(_)) | Err(KmError::Hypothesis(_)) => return None,
        Err(e) => {
            let payload = json!({ "b": bohr_json(&b), "a": a.to_vec(), "eps": eps, "p": p });
            return Some(Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) })));
        }
    };
    let ma = mu_of_set(&a).ok()?;
    let gg = diffconv(ma.func(), ma.func()).ok()?;
    let want = (1.0 + eps / 4.0) / b.density();
    let at = lp_norm_wrt(&gg, out.p_prime as f64, Some(&nu)).ok()?;
    let mut margin = ge_margin(at, want);
    if out.p_prime > 1 {
        let below = lp_norm_wrt(&gg, (out.p_prime - 1) as f64, Some(&nu)).ok()?;
        margin = margin.min((want - below) / want + TOL);
    }
    let scale = (1.0 - eps.ln()) / eps * p as f64;
    Some(
        Instance::new(
            margin,
            json!({ "b": bohr_json(&b), "a": a.to_vec(), "eps": eps, "p": p, "p_prime": out.p_prime }),
        )
        .with_const("k_lp_orth", out.p_prime as f64 / scale),
    )
}

pub(super) fn posdef(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let b = gen::regular_bohr(rng, 100, 3000, 2, k.reg_const)?;
    let d = b.rank() as f64;
    let b1 = gen::regular_narrow(&b, k.c_cover / d, k.reg_const)?;
    let b2 = gen::regular_narrow(&b1, k.c_cover / b1.rank() as f64, k.reg_const)?;
    let g = b.group().clone();
    let f = gen::func(rng, &g);
    let p = 2 * gen::range(rng, 1, 2) as u32;
    let nu = posdef_measure(&b1, &b2).ok()?;
    let lhs = lp_norm_wrt(&diffconv(&f, &f).ok()?, p as f64, Some(&nu)).ok()?;
    let rhs = lp_norm_wrt(&conv(&f, &f).ok()?, p as f64, Some(&b.measure())).ok()?;
    let spec = spectral_min(nu.func()).min_re;
    let margin = ge_margin(lhs, rhs / 2.0).min(spec + 1e-10);
    Some(Instance::new(
        margin,
        json!({ "b": bohr_json(&b), "b1": bohr_json(&b1), "b2": bohr_json(&b2), "p": p, "lhs": lhs, "rhs": rhs }),
    ))
}

pub(super) fn holder_bohr(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let (b, a) = set_in_bohr(rng, k, 200, 3000)?;
    let eps = gen::real(rng, 0.1, 0.9);
    let alpha = a.density_in(b.members());
    let rho = k.c_narrow * eps * alpha / b.rank() as f64;
    let b1 = gen::regular_narrow(&b, rho, k.reg_const)?;
    let dc = gen::real(rng, 0.2, 1.0);
    let c = gen::subset(rng, b1.members(), dc);
    if c.is_empty() {
        return None;
    }
    let payload = json!({ "b": bohr_json(&b), "a": a.to_vec(), "b1": bohr_json(&b1), "c": c.to_vec(), "eps": eps });
    let ctx = LiftContext::Bohr { b: &b, b_prime: &b1 };
    let out = match holder_lift(&a, &c, eps, ctx, k) {
        Ok(o) => o,
        Err(KmError::Hypothesis(_)) => return None,
        Err(e) => return Some(Instance::new(-1.0, json!({ "input": payload, "error": err_json(&e) }))),
    };
    let target = 1.0 / b.density();
    let u = b.measure().into_func();
    let w = b1.measure();
    let margin = check_lift(&out, &a, &c, eps, &u, Some(&w), target)?;
    Some(Instance::new(margin, payload).with_count(lift_kind(&out), 1))
}
