use km_core::fourier::{dft, inverse, moment_direct, moment_via_spectrum, spectral_energy, spectral_min};
use km_core::func::{conv, diffconv, inner_wrt, lp_norm_wrt, mu_of_set};
use km_core::{Constants, FuncR, GSet, Group};
use serde_json::json;

use super::gen;
use super::{func_json, rel_le, set_json, Instance, Source};

/// Groups of size at most 512 with several factor shapes.
const MID: &[&str] = &[
    "Z512", "Z3^5", "Z8^3", "Z7xZ73", "Z17^2", "Z2^9", "Z100", "Z33", "Z5^3", "Z6xZ10", "Z127",
];
const SMALL: &[&str] = &["Z7", "Z12", "Z16", "Z3xZ4", "Z3^3", "Z5^2", "Z2^5", "Z31", "Z8xZ8"];
/// Larger groups for the randomized half of the exhaustive suites.
const LARGER: &[&str] = &["Z11", "Z13", "Z30", "Z64", "Z3^4", "Z5^3", "Z2^7", "Z101", "Z9xZ9", "Z257"];

fn z7() -> Group {
    Group::cyclic(7).expect("Z7")
}

fn delta(g: &Group, i: usize) -> FuncR {
    FuncR::new(g, (0..g.size()).map(|x| if x == i { 1.0 } else { 0.0 }).collect())
        .expect("right length")
}

fn ip(f: &FuncR, g: &FuncR) -> f64 {
    inner_wrt(f, g, None).expect("same group")
}

pub(super) fn adjoint(_: &Constants, src: Source) -> Option<Instance> {
    let (f, g, h) = match src {
        Source::Item(i) => {
            let z = z7();
            (delta(&z, i / 49), delta(&z, i / 7 % 7), delta(&z, i % 7))
        }
        Source::Random(rng) => {
            let z = gen::group(rng, SMALL);
            (gen::func(rng, &z), gen::func(rng, &z), gen::func(rng, &z))
        }
    };
    let lhs = ip(&f, &conv(&g, &h).ok()?);
    let rhs = ip(&diffconv(&h, &f).ok()?, &g);
    let printed = ip(&diffconv(&f, &h).ok()?, &g);
    let err = (lhs - rhs).abs();
    let printed_bad = ((lhs - printed).abs() > 1e-10) as u64;
    Some(
        Instance::new(
            1e-10 - err,
            json!({ "f": func_json(&f), "g": g.values(), "h": h.values(), "lhs": lhs, "rhs": rhs }),
        )
        .with_count("printed_variant_violations", printed_bad),
    )
}

pub(super) fn conv_fourier(_: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let z = gen::group(rng, MID);
    let f = gen::func(rng, &z);
    let g = gen::func(rng, &z);
    let (ff, fg) = (dft(&f), dft(&g));
    let conv_err = dft(&conv(&f, &g).ok()?).max_abs_diff(&ff.pointwise_mul(&fg).ok()?);
    let conj: Vec<_> = ff.values().iter().map(|c| c.conj()).collect();
    let conj = km_core::FuncC::new(&z, conj).ok()?;
    let diff_err = dft(&diffconv(&f, &g).ok()?).max_abs_diff(&conj.pointwise_mul(&fg).ok()?);
    let energy = ip(&f, &f);
    let parseval_err = (spectral_energy(&ff) - energy).abs();
    let inv_err = inverse(&ff).real_part().max_abs_diff(&f);
    let err = conv_err.max(diff_err).max(parseval_err).max(inv_err);
    Some(Instance::new(
        1e-9 - err,
        json!({
            "group": z.to_string(),
            "conv": conv_err, "diffconv": diff_err, "parseval": parseval_err, "inverse": inv_err,
        }),
    ))
}

pub(super) fn moment_spectrum(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let z = gen::group(rng, SMALL);
    let f = if gen::range(rng, 0, 1) == 0 {
        gen::func(rng, &z)
    } else {
        let m = mu_of_set(&gen::set(rng, &z, 0.1, 0.7)).ok()?;
        diffconv(m.func(), m.func()).ok()?.add_constant(-1.0).to_float()
    };
    let mut margin = f64::INFINITY;
    let mut rows = Vec::new();
    for e in 2..=4u32 {
        let direct = moment_direct(&f, e);
        let spec = moment_via_spectrum(&f, e, k.moment_k_cap).ok()?;
        margin = margin.min(1e-9 * direct.abs().max(1.0) - (spec - direct).abs());
        rows.push(json!({ "k": e, "direct": direct, "spectral": spec }));
    }
    Some(Instance::new(margin, json!({ "f": func_json(&f), "moments": rows })))
}

fn subset_instance(src: Source, lo: f64, hi: f64) -> GSet {
    match src {
        Source::Item(i) => gen::small_subset(i),
        Source::Random(rng) => {
            let z = gen::group(rng, LARGER);
            gen::set(rng, &z, lo, hi)
        }
    }
}

fn balanced(a: &GSet) -> Option<FuncR> {
    let m = mu_of_set(a).ok()?;
    Some(diffconv(m.func(), m.func()).ok()?.add_constant(-1.0))
}

pub(super) fn spectral_nonneg(_: &Constants, src: Source) -> Option<Instance> {
    let a = subset_instance(src, 0.05, 0.9);
    let sm = spectral_min(&balanced(&a)?);
    Some(Instance::new(
        sm.min_re + 1e-10,
        json!({ "set": set_json(&a), "min_re": sm.min_re, "max_im": sm.max_im }),
    ))
}

pub(super) fn lp_monotone(_: &Constants, src: Source) -> Option<Instance> {
    let a = subset_instance(src, 0.05, 0.9);
    let m = mu_of_set(&a).ok()?;
    let sum = conv(m.func(), m.func()).ok()?.add_constant(-1.0);
    let diff = diffconv(m.func(), m.func()).ok()?.add_constant(-1.0);
    let mut margin = f64::INFINITY;
    let mut rows = Vec::new();
    for p in [2.0, 4.0, 6.0] {
        let l = lp_norm_wrt(&sum, p, None).ok()?;
        let r = lp_norm_wrt(&diff, p, None).ok()?;
        margin = margin.min(r + 1e-10 * r.max(1.0) - l);
        rows.push(json!({ "p": p, "sum": l, "difference": r }));
    }
    Some(Instance::new(margin, json!({ "set": set_json(&a), "norms": rows })))
}

pub(super) fn odd_moment(_: &Constants, src: Source) -> Option<Instance> {
    let a = subset_instance(src, 0.05, 0.9);
    let f = balanced(&a)?;
    let mut margin = f64::INFINITY;
    let mut rows = Vec::new();
    for k in [3u32, 5, 7] {
        let m = moment_direct(&f, k);
        let scale = moment_direct(&f.map(f64::abs), k).max(1.0);
        margin = margin.min(m / scale + 1e-10);
        rows.push(json!({ "k": k, "moment": m }));
    }
    Some(Instance::new(margin, json!({ "set": set_json(&a), "moments": rows })))
}

pub(super) fn mean_zeroing(_: &Constants, src: Source) -> Option<Instance> {
    let a = subset_instance(src, 0.01, 0.9);
    let m = mu_of_set(&a).ok()?;
    let full = dft(m.func());
    let zeroed = dft(&m.func().add_constant(-1.0));
    let top = m.func().max().max(1.0);
    let mut err = zeroed.value(0).norm();
    for i in 1..a.group().size() {
        err = err.max((zeroed.value(i) - full.value(i)).norm());
    }
    Some(Instance::new(
        1e-12 * top - err,
        json!({ "set": set_json(&a), "error": err }),
    ))
}

pub(super) fn fourier_digression(_: &Constants, src: Source) -> Option<Instance> {
    let (a, c) = match src {
        Source::Item(i) => {
            let z = z7();
            (gen::mask_set(&z, (i / 127) as u64 + 1), gen::mask_set(&z, (i % 127) as u64 + 1))
        }
        Source::Random(rng) => {
            let z = gen::group(rng, &["Z11", "Z13", "Z31", "Z3^3", "Z5^2", "Z64", "Z101", "Z127"]);
            let a = gen::set(rng, &z, 0.05, 0.5);
            let free = a.sumset(&a).ok()?.complement();
            let d = gen::real(rng, 0.3, 1.0);
            (a, gen::subset(rng, &free, d))
        }
    };
    if c.is_empty() {
        return None;
    }
    let ma = mu_of_set(&a).ok()?;
    let mc = mu_of_set(&c).ok()?;
    let inner = ip(&conv(ma.func(), ma.func()).ok()?, mc.func());
    if inner > 0.5 {
        return None;
    }
    let (fa, fc) = (dft(ma.func()), dft(mc.func()));
    let sum: f64 = (1..a.group().size())
        .map(|l| fa.value(l).norm_sqr() * fc.value(l).norm())
        .sum();
    Some(Instance::new(
        rel_le(0.5, sum + 1e-10),
        json!({ "a": set_json(&a), "c": c.to_vec(), "inner": inner, "sum": sum }),
    ))
}
