//! The acceptance checklist: one pass/fail line per criterion.
//!
//! Golden files live in `tests/golden`; run with `KM_BLESS=1` to rewrite them
//! after an intended change.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;

use km::verify::{run_suite, Ledger, SuiteId, SuiteReport, SuiteSpec};
use km_core::func::{conv, diffconv, inner_wrt, mu_of_set};
use km_core::km::{find_smoothing_bohr, find_smoothing_subspace, BohrBudget};
use km_core::pipelines::{
    behrend, embed_interval, integer_3ap_count, is_ap_free, replay_ffq, roth_ffq_driver,
    step_limit, three_sumset_ap_pipeline, FfqConfig, FfqTerminal, Strategy, ThreeSumOutcome,
    ZnzConfig,
};
use km_core::rng::{below, seeded, unit};
use km_core::{num, BohrSet, Constants, FuncR, GSet, Group, KmError};
use serde_json::{json, Value};

const SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn suite(id: SuiteId, instances: usize, exhaustive: bool) -> Result<SuiteReport, String> {
    let ledger = Ledger::committed();
    let spec = SuiteSpec { suite: id, instances, seed: SEED, exhaustive };
    let rep = run_suite(&spec, &ledger.constants, Some(&ledger)).map_err(|e| e.to_string())?;
    if rep.failures.is_empty() && rep.skipped < rep.instances {
        Ok(rep)
    } else {
        Err(format!(
            "{id}{}: {} failures, {} skipped, first {:?}",
            if exhaustive { " (exhaustive)" } else { "" },
            rep.failures.len(),
            rep.skipped,
            rep.failures.first().map(|f| &f.instance)
        ))
    }
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares `value` with the named golden file, rewriting it under `KM_BLESS`.
fn golden(name: &str, value: &Value) -> Result<(), String> {
    let path = golden_path(name);
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    if std::env::var_os("KM_BLESS").is_some() {
        std::fs::write(&path, &text).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(want == text, format!("{name} differs from the golden copy: got {text}"))
}

const GROUPS: &[&str] = &["Z512", "Z3^5", "Z8^3", "Z7xZ73", "Z17^2", "Z2^9", "Z100", "Z5^3"];

fn algebra_kernel() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let mut rng = seeded(SEED, i);
        let g = Group::parse(GROUPS[below(&mut rng, GROUPS.len())]).unwrap();
        let d = unit(&mut rng);
        let a = GSet::from_fn(&g, |_| unit(&mut rng) < d);
        let b = GSet::from_fn(&g, |_| unit(&mut rng) < 0.5);
        let (fa, fb) = (FuncR::indicator(&a), FuncR::indicator(&b));
        let (xa, xb) = (fa.to_float(), fb.to_float());
        ensure(!xa.is_exact(), "to_float kept the exact path")?;
        let e1 = conv(&fa, &fb).unwrap().max_abs_diff(&conv(&xa, &xb).unwrap());
        let e2 = diffconv(&fa, &fb).unwrap().max_abs_diff(&diffconv(&xa, &xb).unwrap());
        worst = worst.max(e1).max(e2);
    }
    ensure(worst <= 1e-12, format!("exact vs float differs by {worst:e}"))?;
    let rep = suite(SuiteId::ConvFourier, 200, false)?;
    Ok(format!(
        "exact/float gap {worst:.1e}; transform identities min margin {:.1e} on 200 instances",
        rep.min_margin.unwrap()
    ))
}

fn spectral_facts() -> Outcome {
    let mut checked = 0;
    for id in [SuiteId::SpectralNonneg, SuiteId::OddMoment, SuiteId::LpMonotone, SuiteId::MeanZeroing] {
        checked += suite(id, 0, true)?.checked;
        checked += suite(id, 200, false)?.checked;
    }
    Ok(format!("4 suites, {checked} instances (all subsets of Z5 and Z7 plus 200 seeded each)"))
}

fn adjoint() -> Outcome {
    let ex = suite(SuiteId::Adjoint, 0, true)?;
    let printed = ex.counts.get("printed_variant_violations").copied().unwrap_or(0);
    ensure(printed > 0, "the point-mass oracle does not separate the two pairings")?;
    let rnd = suite(SuiteId::Adjoint, 200, false)?;
    Ok(format!(
        "<f,g*h> = <h o f,g> on all 343 point-mass triples and {} random triples; \
         the <f o h,g> pairing fails on {printed} triples",
        rnd.checked
    ))
}

fn unbalancing() -> Outcome {
    let rep = suite(SuiteId::Unbalancing, 1000, false)?;
    let c = rep.ledger.get("k_unb").ok_or("no ledger comparison")?;
    ensure(!c.regression, format!("observed {} exceeds {}", c.observed, c.threshold))?;
    Ok(format!(
        "1000 instances; max p'/(eps^-1 ln(e/eps) p) = {:.3} <= K_unb = {}",
        c.observed, c.threshold
    ))
}

fn drc_and_sifting() -> Outcome {
    let a = suite(SuiteId::DrcIdentity, 0, true)?;
    let b = suite(SuiteId::Sifting, 0, true)?;
    let c = suite(SuiteId::DrcIdentity, 200, false)?;
    let d = suite(SuiteId::Sifting, 200, false)?;
    ensure(!b.counts.contains_key("exhausted"), "a sifting search came back empty")?;
    Ok(format!(
        "identity and both inequalities on {} exhaustive + {} seeded inputs; sifting certified on {} + {}",
        a.checked, c.checked, b.checked, d.checked
    ))
}

fn almost_periodicity() -> Outcome {
    let g = Group::parse("F3^2").unwrap();
    let line = GSet::from_indices(&g, [0, 1, 2]);
    let r = find_smoothing_subspace(&line, &line, &line, 1e-9, 2).map_err(|e| e.to_string())?;
    ensure(r.found.codim() <= 1, format!("codimension {}", r.found.codim()))?;

    let k = Constants::default();
    let budget = BohrBudget::default();
    let z = Group::cyclic(101).unwrap();
    let (mut found, mut not_found) = (0, 0);
    let mut margins = Vec::new();
    for i in 0..50 {
        let mut rng = seeded(SEED, i);
        let f = 1 + below(&mut rng, 100);
        let w = 0.6 + 1.2 * unit(&mut rng);
        let (_, b) = BohrSet::new(&z, vec![f], vec![w]).unwrap().regular_dilate(k.reg_const).unwrap();
        let bp = b.dilate(0.3).unwrap();
        let a = GSet::from_fn(&z, |x| b.contains(x) && unit(&mut rng) < 0.6);
        if a.is_empty() {
            continue;
        }
        let s = GSet::from_fn(&z, |x| b.contains(x) && unit(&mut rng) < 0.5);
        match find_smoothing_bohr(&b, &bp, &a, &a, &s, 0.1, &budget) {
            Ok(sm) => {
                // recompute both pairings from scratch
                let h = diffconv(mu_of_set(&a).unwrap().func(), mu_of_set(&a).unwrap().func()).unwrap();
                let ind = FuncR::indicator(&s);
                let base = inner_wrt(&h, &ind, None).unwrap();
                let smoothed = inner_wrt(&conv(sm.found.measure().func(), &h).unwrap(), &ind, None).unwrap();
                ensure((smoothed - base).abs() <= 0.1 + 1e-9, "uncertified smoothing")?;
                ensure(sm.found.members().is_subset(bp.members()), "smoothing set escapes B'")?;
                found += 1;
            }
            Err(KmError::OracleBudgetExceeded { best_margin }) => {
                ensure(best_margin.is_finite(), "missing margin")?;
                margins.push(best_margin);
                not_found += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    golden(
        "smoothing_bohr.json",
        &json!({ "instances": 50, "seed": SEED, "found": found, "not_found": not_found, "not_found_margins": margins }),
    )?;
    Ok(format!(
        "F3^2 line smooths at codimension {}; Z101: {found} found, {not_found} not found with margins",
        r.found.codim()
    ))
}

fn density_increment() -> Outcome {
    let g = Group::parse("F3^2").unwrap();
    let k = Constants::default();
    let cfg = FfqConfig::default();
    let mut steps = 0;
    for mask in 0u32..512 {
        let a = GSet::from_fn(&g, |i| mask >> i & 1 == 1);
        let t = roth_ffq_driver(&a, &cfg, &k).map_err(|e| format!("mask {mask}: {e}"))?;
        replay_ffq(&a, &t, &k).map_err(|e| format!("mask {mask}: replay {e}"))?;
        if a.is_empty() {
            ensure(matches!(t.terminal, FfqTerminal::Empty), "empty set")?;
            continue;
        }
        let limit = step_limit(k.c_inc, cfg.eps, a.density());
        ensure(t.steps.len() <= limit, format!("mask {mask}: {} steps > {limit}", t.steps.len()))?;
        for s in &t.steps {
            let cell = s.cell.members(&g).map_err(|e| e.to_string())?;
            let d = a.intersection(&cell).card() as f64 / cell.card() as f64;
            ensure(d == s.density && d >= s.required, format!("mask {mask}: density {d} vs {}", s.density))?;
        }
        steps += t.steps.len();
    }
    Ok(format!("all 512 subsets of F3^2 terminate and replay; {steps} certified increment steps"))
}

fn bohr_calculus() -> Outcome {
    for id in [SuiteId::Bohrsiz, SuiteId::Bohrreg, SuiteId::BohrAp] {
        suite(id, 100, false)?;
    }
    let mut parts = Vec::new();
    for (id, name) in [(SuiteId::Regconv, "k_regconv"), (SuiteId::Fourierbohr, "c_cover")] {
        let rep = suite(id, 100, false)?;
        let c = rep.ledger.get(name).ok_or("no ledger comparison")?;
        ensure(c.within_10_percent && !c.regression, format!("{name}: {c:?}"))?;
        parts.push(format!("{name} {:.3} vs ledger {:.3}", c.observed, c.recorded.unwrap()));
    }
    Ok(format!("bohrsiz, bohrreg, bohr-ap pass on 100 instances; {}", parts.join(", ")))
}

fn constructions() -> Outcome {
    let mut sizes = Vec::new();
    for n in [100u64, 1000, 10_000] {
        for (st, name) in [(Strategy::Ternary, "ternary"), (Strategy::Sphere, "sphere")] {
            let a = behrend(n, st);
            ensure(is_ap_free(&a, n), format!("{name} at {n} has a progression"))?;
            sizes.push(json!({ "n": n, "strategy": name, "size": a.len() }));
        }
    }
    golden("behrend_sizes.json", &Value::Array(sizes))?;
    ensure(behrend(14, Strategy::Ternary) == vec![1, 2, 4, 5, 10, 11, 13, 14], "ternary 14")?;
    for i in 0..200 {
        let mut rng = seeded(SEED, i);
        let n = 1 + below(&mut rng, 2000) as u64;
        let d = unit(&mut rng);
        let a: Vec<u64> = (1..=n).filter(|_| unit(&mut rng) < d).collect();
        let (_, set) = embed_interval(&a, n).map_err(|e| e.to_string())?;
        ensure(set.count_3aps() == integer_3ap_count(&a), format!("count mismatch at n = {n}"))?;
    }
    Ok("behrend AP-free at 10^2, 10^3, 10^4; ternary(14) exact; 200 embedding counts agree".into())
}

fn three_sum() -> Outcome {
    let k = Constants::default();
    let (mut ok, mut failed) = (0, Vec::new());
    for i in 0..20 {
        let mut rng = seeded(SEED, i);
        let n = 95 + below(&mut rng, 13) as u64;
        let alpha = 0.4 + 0.3 * unit(&mut rng);
        let a: Vec<u64> = (1..=n).filter(|_| unit(&mut rng) < alpha).collect();
        let cfg = ZnzConfig { seed: i, ..ZnzConfig::default() };
        match three_sumset_ap_pipeline(&a, n, &cfg, &k).map_err(|e| e.to_string())? {
            ThreeSumOutcome::Success(r) => {
                let p = num::next_prime(n.max(2));
                let g = Group::cyclic(p as u32).unwrap();
                // A + A + A in Z_p by brute force
                let mut two = vec![false; p as usize];
                for &x in &a {
                    for &y in &a {
                        two[((x + y) % p) as usize] = true;
                    }
                }
                let sum = GSet::from_fn(&g, |t| {
                    a.iter().any(|&z| two[((t as u64 + p - z % p) % p) as usize])
                });
                ensure(r.run.inside(&g, &sum), format!("instance {i}: run not inside A+A+A"))?;
                ensure(r.run.length >= 1 && (r.run.length == 1 || r.run.step != 0), "degenerate run")?;
                ok += 1;
            }
            ThreeSumOutcome::CheckFailed { stage, margin, detail, .. } => {
                ensure(!stage.is_empty() && !detail.is_empty(), format!("instance {i}: unnamed failure"))?;
                failed.push(format!("{stage} (margin {margin:?})"));
            }
        }
    }
    Ok(format!("{ok}/20 runs verified inside A+A+A; failures: [{}]", failed.join(", ")))
}

fn reproducibility() -> Outcome {
    let dir = std::env::temp_dir().join(format!("km-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let set = dir.join("a.json");
    std::fs::write(&set, r#"{"group":"Z5","elements":[[0],[1],[3]]}"#).unwrap();
    let fset = dir.join("f.json");
    std::fs::write(&fset, r#"{"group":"F3^2","elements":[[0,0],[0,1],[0,2],[1,0],[1,1],[1,2]]}"#).unwrap();
    let s = set.to_str().unwrap();
    let f = fset.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["count-aps", "--set", s, "--json"],
        vec!["behrend", "--n", "500", "--json"],
        vec!["verify", "bohrsiz", "--instances", "20", "--seed", "7", "--json"],
        vec!["verify", "sifting", "--instances", "20", "--seed", "7", "--json"],
        vec!["sift", "--set", f, "--seed", "3", "--json"],
        vec!["roth-ffq", "--set", f, "--eps", "0.2", "--seed", "3", "--json"],
        vec!["three-sum", "--n", "101", "--seed", "5", "--json"],
    ];
    for args in &runs {
        let go = || Command::new(env!("CARGO_BIN_EXE_km")).args(args).output().unwrap();
        let (x, y) = (go(), go());
        ensure(x.status.code() == y.status.code(), format!("{args:?}: exit codes differ"))?;
        ensure(!x.stdout.is_empty() && x.stdout == y.stdout, format!("{args:?}: output differs"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations byte-identical on rerun", runs.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("algebra kernel", algebra_kernel),
        ("spectral facts", spectral_facts),
        ("adjoint identity", adjoint),
        ("unbalancing", unbalancing),
        ("dependent random choice and sifting", drc_and_sifting),
        ("almost-periodicity oracles", almost_periodicity),
        ("density increment", density_increment),
        ("Bohr calculus", bohr_calculus),
        ("constructions", constructions),
        ("A+A+A pipeline", three_sum),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
