use km_core::func::{conv, lp_norm_wrt};
use km_core::{BohrSet, Constants, FuncR, ProbMeasure};
use serde_json::json;

use super::gen;
use super::{bohr_json, rel_le, Instance, Source};

pub(super) fn bohrsiz(_: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let n = gen::range(rng, 50, 10_000) as u64;
    let b = gen::bohr_on(rng, n, 3, 0.2);
    let rho = gen::real(rng, 0.01, 1.0);
    let small = b.dilate(rho).ok()?;
    let bound = (rho / 4.0).powi(b.rank() as i32) * b.size() as f64;
    Some(Instance::new(
        (small.size() as f64 - bound) / bound.max(1.0),
        json!({ "b": bohr_json(&b), "rho": rho, "dilate_size": small.size(), "bound": bound }),
    ))
}

pub(super) fn bohrreg(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let n = gen::range(rng, 50, 10_000) as u64;
    let b = gen::bohr_on(rng, n, 3, 0.2);
    let payload = json!({ "b": bohr_json(&b) });
    let (rho, reg) = match b.regular_dilate(k.reg_const) {
        Ok(r) => r,
        Err(e) => return Some(Instance::new(-1.0, json!({ "input": payload, "error": e.to_string() }))),
    };
    let mut margin = if (0.5..=1.0).contains(&rho) { f64::INFINITY } else { -1.0 };
    // independent spot checks of the regularity window by direct membership
    let rd = k.reg_const * b.rank() as f64;
    let size = reg.size() as f64;
    for j in 1..=8 {
        let kappa = j as f64 / 8.0 / rd;
        for kappa in [kappa, -kappa] {
            let s = b.dilate(rho * (1.0 + kappa)).ok()?.size() as f64;
            let slack = rd * kappa.abs() * size - (s - size).abs();
            margin = margin.min(slack / size);
        }
    }
    Some(Instance::new(margin, json!({ "input": payload, "rho": rho, "size": reg.size() })))
}

/// A probability measure with random weights on the members of `s`.
fn random_measure(rng: &mut km_core::rng::Rng, s: &BohrSet) -> Option<ProbMeasure> {
    let g = s.group();
    let mut v = vec![0.0; g.size()];
    for x in s.members().iter() {
        v[x] = gen::real(rng, 0.1, 1.0);
    }
    let total: f64 = v.iter().sum();
    let scale = g.size() as f64 / total;
    ProbMeasure::new(FuncR::new(g, v.iter().map(|x| x * scale).collect()).ok()?).ok()
}

pub(super) fn regconv(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let b = gen::regular_bohr(rng, 100, 10_000, 3, k.reg_const)?;
    let d = b.rank() as f64;
    let top = 1.0 / (k.reg_const * d);
    let rho = top * (1e-2f64).powf(gen::real(rng, 0.0, 1.0));
    let small = b.dilate(rho).ok()?;
    let mu = if gen::range(rng, 0, 1) == 0 { small.measure() } else { random_measure(rng, &small)? };
    let mb = b.measure();
    let diff = conv(mb.func(), mu.func()).ok()?.sub(mb.func()).ok()?;
    let l1 = lp_norm_wrt(&diff, 1.0, None).ok()?;
    let kk = l1 / (rho * d);
    Some(
        Instance::new(
            rel_le(kk, k.k_regconv),
            json!({ "b": bohr_json(&b), "rho": rho, "support": small.size(), "l1": l1 }),
        )
        .with_const("k_regconv", kk),
    )
}

pub(super) fn fourierbohr(k: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let b = gen::regular_bohr(rng, 100, 3000, 3, k.reg_const)?;
    let d = b.rank() as f64;
    let l = gen::range(rng, 1, 4);
    let c_try = gen::real(rng, 1e-3, 1.0);
    let rho = c_try / (l as f64 * d);
    let bp = b.dilate(rho).ok()?;
    let wide = b.dilate(1.0 + l as f64 * rho).ok()?;
    let mut rhs = wide.measure().into_func();
    let mp = bp.measure();
    for _ in 0..l {
        rhs = conv(&rhs, mp.func()).ok()?;
    }
    let mb = b.measure();
    let margin = b
        .members()
        .iter()
        .map(|x| (2.0 * rhs.value(x) - mb.func().value(x)) / mb.func().value(x))
        .fold(f64::INFINITY, f64::min);
    let payload = json!({ "b": bohr_json(&b), "l": l, "c": c_try, "rho": rho, "margin": margin });
    let failed = margin < -1e-12;
    let mut inst = if c_try <= k.c_cover {
        Instance::new(margin + 1e-12, payload)
    } else {
        // outside the hypothesis: recorded for calibration, not asserted
        Instance::new(margin.max(0.0), payload).with_count("unasserted_violations", failed as u64)
    };
    inst = inst.with_const("c_cover", if failed { c_try } else { 1.0 });
    Some(inst)
}

pub(super) fn bohr_ap(_: &Constants, src: Source) -> Option<Instance> {
    let Source::Random(rng) = src else { return None };
    let p = gen::prime_between(rng, 100, 10_000);
    let b = {
        let raw = gen::bohr_on(rng, p, 3, 0.05);
        let widths: Vec<f64> = raw.widths().iter().map(|w| w.min(0.6)).collect();
        BohrSet::new(raw.group(), raw.freqs().to_vec(), widths).ok()?
    };
    let run = b.extract_ap().ok()?;
    let bound = b.ap_lemma_bound();
    let inside = run.inside(b.group(), b.members()) && (run.length == 1 || run.step != 0);
    let margin = if inside {
        (run.length as f64 - bound as f64) / bound as f64
    } else {
        -1.0
    };
    Some(Instance::new(
        margin,
        json!({ "b": bohr_json(&b), "start": run.start, "step": run.step, "length": run.length, "bound": bound }),
    ))
}
