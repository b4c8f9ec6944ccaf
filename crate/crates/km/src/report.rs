//! JSON renderings of library results.

use km_core::km::{DrcResult, IncrementOutcome, SiftResult, Subspace};
use km_core::pipelines::{
    ApReport, FfqCell, FfqTerminal, FfqTrace, ThreeSumOutcome, ZnzStep, ZnzTerminal, ZnzTrace,
};
use km_core::{ApRun, BohrSet, GSet, Group};
use serde_json::{json, Value};

use crate::io::{BohrFile, SetFile};

pub fn element(g: &Group, idx: usize) -> Value {
    json!(g.element(idx).0)
}

pub fn set(s: &GSet) -> Value {
    serde_json::to_value(SetFile::from_set(s)).expect("plain data")
}

pub fn ap_run(g: &Group, r: &ApRun) -> Value {
    json!({
        "start": element(g, r.start),
        "step": element(g, r.step),
        "length": r.length,
    })
}

pub fn bohr(b: &BohrSet) -> Value {
    let mut v = serde_json::to_value(BohrFile::from_bohr(b)).expect("plain data");
    let m = v.as_object_mut().expect("object");
    m.insert("size".into(), json!(b.size()));
    m.insert("rank".into(), json!(b.rank()));
    m
        .insert("regularity".into(), serde_json::to_value(b.regularity()).expect("plain data"));
    v
}

pub fn subspace(v: &Subspace) -> Value {
    json!({
        "checks": v.checks,
        "codim": v.codim(),
        "size": v.members().card(),
    })
}

pub fn drc(g: &Group, d: &DrcResult) -> Value {
    json!({
        "shifts": d.shifts.iter().map(|&s| element(g, s)).collect::<Vec<_>>(),
        "a1": set(&d.a1),
        "a2": set(&d.a2),
        "f_value": d.f_value,
        "f_bound": d.f_bound,
        "densities": [d.densities.0, d.densities.1],
        "density_bound": d.density_bound,
        "p": d.p,
        "examined": d.examined,
    })
}

pub fn sift(g: &Group, s: &SiftResult) -> Value {
    json!({
        "drc": drc(g, &s.drc),
        "s": set(&s.s),
        "inner_value": s.inner_value,
        "delta": s.delta,
    })
}

pub fn increment(g: &Group, out: &IncrementOutcome) -> Value {
    match out {
        IncrementOutcome::NearUniform { inner } => json!({"outcome": "near_uniform", "inner": inner}),
        IncrementOutcome::Increment {
            subspace: v,
            translate,
            new_density,
            required,
            p,
            p_prime,
            sift: sr,
            smoothed,
        } => json!({
            "outcome": "increment",
            "subspace": subspace(v),
            "translate": element(g, *translate),
            "new_density": new_density,
            "required": required,
            "p": p,
            "p_prime": p_prime,
            "sift": sift(g, sr),
            "smoothed": smoothed,
        }),
    }
}

fn ffq_cell(g: &Group, c: &FfqCell) -> Value {
    json!({
        "offset": element(g, c.offset),
        "basis": c.basis.iter().map(|&b| element(g, b)).collect::<Vec<_>>(),
    })
}

pub fn ffq_trace(g: &Group, t: &FfqTrace) -> Value {
    let steps: Vec<Value> = t
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "certificate": i,
                "cell": ffq_cell(g, &s.cell),
                "codim": s.codim,
                "density_before": s.density_before,
                "density": s.density,
                "required": s.required,
                "p": s.p,
                "p_prime": s.p_prime,
                "p_sift": s.p_sift,
                "shifts_examined": s.shifts_examined,
                "smoothed": s.smoothed,
            })
        })
        .collect();
    let terminal = match &t.terminal {
        FfqTerminal::NearUniform { inner, aps, cell_size } => json!({
            "kind": "near_uniform", "inner": inner, "aps": aps, "cell_size": cell_size,
        }),
        FfqTerminal::BudgetExceeded { stage, detail } => {
            json!({"kind": "budget_exceeded", "stage": stage, "detail": detail})
        }
        FfqTerminal::Empty => json!({"kind": "empty"}),
    };
    json!({
        "eps": t.eps,
        "initial_density": t.initial_density,
        "steps": steps,
        "final_cell": ffq_cell(g, &t.final_cell),
        "terminal": terminal,
    })
}

fn znz_step(g: &Group, i: usize, s: &ZnzStep) -> Value {
    json!({
        "certificate": i,
        "kind": format!("{:?}", s.kind),
        "bohr": bohr(&s.bohr),
        "via": s.via.as_ref().map(|(b, x)| json!({"b1": bohr(b), "translate": element(g, *x)})),
        "shift": element(g, s.shift),
        "density_before": s.density_before,
        "density": s.density,
        "required": s.required,
        "p": s.p,
        "p_prime": s.p_prime,
        "p_sift": s.p_sift,
    })
}

pub fn znz_trace(g: &Group, t: &ZnzTrace) -> Value {
    let terminal = match &t.terminal {
        ZnzTerminal::NearUniformCert { value, target } => {
            json!({"kind": "near_uniform_cert", "value": value, "target": target})
        }
        ZnzTerminal::BudgetExceeded { stage, detail } => {
            json!({"kind": "budget_exceeded", "stage": stage, "detail": detail})
        }
        ZnzTerminal::Empty => json!({"kind": "empty"}),
    };
    let final_cell = t.final_cell.as_ref().map(|fc| {
        json!({
            "b": bohr(&fc.b),
            "b1": bohr(&fc.b1),
            "b2": bohr(&fc.b2),
            "a_prime": set(&fc.a_prime),
            "alpha": fc.alpha,
            "translate": element(g, fc.translate),
            "aps": fc.a_prime.count_3aps(),
        })
    });
    json!({
        "eps": t.eps,
        "goal": format!("{:?}", t.goal),
        "initial_density": t.initial_density,
        "steps": t.steps.iter().enumerate().map(|(i, s)| znz_step(g, i, s)).collect::<Vec<_>>(),
        "final_cell": final_cell,
        "terminal": terminal,
    })
}

fn ap_report(g: &Group, r: &ApReport) -> Value {
    json!({
        "status": "success",
        "modulus": r.modulus,
        "run": ap_run(g, &r.run),
        "container_size": r.container.card(),
        "verified": r.verified,
        "b_double_prime": bohr(&r.b_double_prime),
        "rho": r.rho,
        "sumset_density": r.sumset_density,
        "sumset_target": r.sumset_target,
        "lemma_bound": r.lemma_bound,
        "trace": znz_trace(g, &r.trace),
    })
}

pub fn three_sum(g: &Group, out: &ThreeSumOutcome) -> Value {
    match out {
        ThreeSumOutcome::Success(r) => ap_report(g, r),
        ThreeSumOutcome::CheckFailed {
            stage,
            margin,
            detail,
            trace,
        } => json!({
            "status": "check_failed",
            "stage": stage,
            "margin": margin,
            "detail": detail,
            "trace": trace.as_ref().map(|t| znz_trace(g, t)),
        }),
    }
}
