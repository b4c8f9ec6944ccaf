use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use km::envelope::{envelope, render_human};
use km::io::{write_json, BohrFile, IntSetFile, SetFile};
use km::report;
use km::verify::{self, Ledger, SuiteId, SuiteSpec};
use km_core::group::DEFAULT_SIZE_CAP;
use km_core::km::{density_increment_step, sift, StepConfig};
use km_core::pipelines::{
    behrend, is_ap_free, roth_ffq_driver, roth_znz_driver, three_sumset_ap_pipeline, FfqConfig,
    Goal, Strategy, ThreeSumOutcome, ZnzConfig,
};
use km_core::rng::{seeded, unit};
use km_core::{Constants, GSet};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "km", version, about = "Three-term progressions, Bohr sets and density increments")]
struct Cli {
    /// Emit one JSON object instead of the human rendering.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized choice; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Constants ledger to use instead of the built-in one.
    #[arg(long, global = true)]
    ledger: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Ternary,
    Sphere,
}

#[derive(Clone, Copy, ValueEnum)]
enum GoalArg {
    ThreeAp,
    Sumset,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count pairs (x, d) with x, x+d, x+2d in the set (d = 0 included).
    CountAps {
        #[arg(long)]
        set: PathBuf,
    },
    /// A progression-free subset of [1, n].
    Behrend {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value = "sphere")]
        strategy: StrategyArg,
        /// Check progression-freeness exhaustively.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bohr set queries.
    Bohr {
        #[command(subcommand)]
        op: BohrOp,
    },
    /// One density-increment step in F_q^n.
    Increment {
        #[arg(long)]
        set: PathBuf,
        /// Defaults to 2·A.
        #[arg(long)]
        cset: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        codim_max: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
    },
    /// Sifting on the whole group.
    Sift {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// The density-increment iteration in F_q^n.
    RothFfq {
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        codim_max: usize,
        #[arg(long, default_value_t = 16)]
        max_steps: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// The Bohr-set iteration in Z_N.
    RothZnz {
        /// A set file on a cyclic group.
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, value_enum, default_value = "three-ap")]
        goal: GoalArg,
        #[arg(long, default_value_t = 8)]
        max_steps: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// A long progression in A+A+A for A ⊆ [1, n].
    ThreeSum {
        #[arg(long)]
        n: u64,
        /// Integer set file; without it a random set of the given density is drawn.
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 8)]
        max_steps: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
    },
    /// Run a property suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Enumerate the suite's exhaustive family instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        /// Measure the calibrated constants and write them to the ledger.
        #[arg(long)]
        calibrate: bool,
        /// Recompute a single instance by index.
        #[arg(long)]
        replay: Option<usize>,
    },
}

#[derive(Subcommand)]
enum BohrOp {
    /// Size, rank and regularity.
    Info {
        #[arg(long)]
        bohr: PathBuf,
    },
    /// The longest progression inside the set (prime modulus).
    ExtractAp {
        #[arg(long)]
        bohr: PathBuf,
    },
}

enum Fail {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

/// Input and argument problems.
fn usage<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Usage(e.into()))
}

/// Failures of a computation on valid input.
fn runtime<T, E: Into<anyhow::Error>>(r: Result<T, E>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Runtime(e.into()))
}

struct Output {
    headline: String,
    envelope: Value,
    ok: bool,
}

struct Ctx {
    seed: u64,
    cap: usize,
    constants: Constants,
    ledger: Ledger,
    ledger_path: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, command: &str, inputs: Value, result: Value) -> Value {
        envelope(command, &inputs, Some(self.seed), &self.constants, result)
    }

    fn load_set(&self, path: &Path) -> Result<(SetFile, GSet), Fail> {
        let f = usage(SetFile::load(path))?;
        let s = usage(f.to_set(self.cap))?;
        Ok((SetFile::from_set(&s), s))
    }
}

fn size_cap() -> Result<usize, Fail> {
    match std::env::var("KM_SIZE_CAP") {
        Ok(v) => usage(v.parse::<usize>().with_context(|| format!("KM_SIZE_CAP={v}"))),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

fn check_eps(eps: f64) -> Result<(), Fail> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Fail::Usage(anyhow!("--eps must lie in (0, 1), got {eps}")))
    }
}

fn run(cli: Cli) -> Result<Output, Fail> {
    if let Some(t) = cli.threads {
        usage(rayon::ThreadPoolBuilder::new().num_threads(t).build_global())?;
    }
    // calibration may create the ledger it writes
    let calibrating = matches!(cli.cmd, Cmd::Verify { calibrate: true, .. });
    let ledger = match &cli.ledger {
        Some(p) if !(calibrating && !p.exists()) => usage(Ledger::load(p))?,
        _ => Ledger::committed(),
    };
    let ctx = Ctx {
        seed: cli.seed,
        cap: size_cap()?,
        constants: ledger.constants.clone(),
        ledger,
        ledger_path: cli.ledger.clone(),
    };
    match cli.cmd {
        Cmd::CountAps { set } => {
            let (file, s) = ctx.load_set(&set)?;
            let count = s.count_3aps();
            let env = ctx.emit("count-aps", json!({ "set": file }), json!({ "count": count }));
            Ok(Output { headline: count.to_string(), envelope: env, ok: true })
        }
        Cmd::Behrend { n, strategy, verify, out } => {
            if n == 0 {
                return Err(Fail::Usage(anyhow!("--n must be at least 1")));
            }
            let st = match strategy {
                StrategyArg::Ternary => Strategy::Ternary,
                StrategyArg::Sphere => Strategy::Sphere,
            };
            let a = behrend(n, st);
            let free = verify.then(|| is_ap_free(&a, n));
            let file = usage(IntSetFile::new(n, a))?;
            if let Some(p) = &out {
                runtime(write_json(p, &file))?;
            }
            let name = match strategy {
                StrategyArg::Ternary => "ternary",
                StrategyArg::Sphere => "sphere",
            };
            let result = json!({ "size": file.elements.len(), "ap_free": free, "set": file });
            let env = ctx.emit("behrend", json!({ "n": n, "strategy": name }), result);
            Ok(Output {
                headline: format!("{} elements", file.elements.len()),
                envelope: env,
                ok: free != Some(false),
            })
        }
        Cmd::Bohr { op } => {
            let (path, extract) = match &op {
                BohrOp::Info { bohr } => (bohr, false),
                BohrOp::ExtractAp { bohr } => (bohr, true),
            };
            let file = usage(BohrFile::load(path))?;
            let b = usage(file.to_bohr(ctx.cap))?.certify(ctx.constants.reg_const);
            let inputs = json!({ "bohr": BohrFile::from_bohr(&b) });
            if extract {
                let run = runtime(b.extract_ap())?;
                let result = json!({
                    "run": report::ap_run(b.group(), &run),
                    "lemma_bound": b.ap_lemma_bound(),
                    "size": b.size(),
                });
                let env = ctx.emit("bohr extract-ap", inputs, result);
                Ok(Output { headline: format!("length {}", run.length), envelope: env, ok: true })
            } else {
                let env = ctx.emit("bohr info", inputs, report::bohr(&b));
                Ok(Output { headline: format!("size {}", b.size()), envelope: env, ok: true })
            }
        }
        Cmd::Increment { set, cset, eps, codim_max, trials } => {
            check_eps(eps)?;
            let (file, a) = ctx.load_set(&set)?;
            let (cfile, c) = match &cset {
                Some(p) => ctx.load_set(p)?,
                None => {
                    let c = usage(a.dilate(2))?;
                    (SetFile::from_set(&c), c)
                }
            };
            let cfg = StepConfig { codim_max, trials, seed: ctx.seed };
            let out = runtime(density_increment_step(&a, &c, eps, &cfg, &ctx.constants))?;
            let inputs = json!({ "set": file, "cset": cfile, "eps": eps, "codim_max": codim_max, "trials": trials });
            let env = ctx.emit("increment", inputs, report::increment(a.group(), &out));
            Ok(Output { headline: String::new(), envelope: env, ok: true })
        }
        Cmd::Sift { set, p, eps, delta, trials } => {
            check_eps(eps)?;
            if !(delta > 0.0 && delta < 1.0) || p == 0 {
                return Err(Fail::Usage(anyhow!("need p >= 1 and delta in (0, 1)")));
            }
            let (file, a) = ctx.load_set(&set)?;
            let full = GSet::full(a.group());
            let r = runtime(sift(&a, &full, &full, p, eps, delta, trials, ctx.seed))?;
            let inputs = json!({ "set": file, "p": p, "eps": eps, "delta": delta, "trials": trials });
            let env = ctx.emit("sift", inputs, report::sift(a.group(), &r));
            Ok(Output { headline: String::new(), envelope: env, ok: true })
        }
        Cmd::RothFfq { set, eps, codim_max, max_steps, trials, trace } => {
            check_eps(eps)?;
            let (file, a) = ctx.load_set(&set)?;
            let cfg = FfqConfig {
                eps,
                max_steps,
                step: StepConfig { codim_max, trials, seed: ctx.seed },
            };
            let t = runtime(roth_ffq_driver(&a, &cfg, &ctx.constants))?;
            let result = report::ffq_trace(a.group(), &t);
            if let Some(p) = &trace {
                runtime(write_json(p, &result))?;
            }
            let inputs = json!({ "set": file, "eps": eps, "codim_max": codim_max, "max_steps": max_steps, "trials": trials });
            let env = ctx.emit("roth-ffq", inputs, result);
            Ok(Output { headline: format!("{} steps", t.steps.len()), envelope: env, ok: true })
        }
        Cmd::RothZnz { set, eps, goal, max_steps, trials, trace } => {
            check_eps(eps)?;
            let (file, a) = ctx.load_set(&set)?;
            if a.group().rank() != 1 {
                return Err(Fail::Usage(anyhow!("roth-znz needs a cyclic group")));
            }
            let (goal, goal_name) = match goal {
                GoalArg::ThreeAp => (Goal::ThreeAp, "three-ap"),
                GoalArg::Sumset => (Goal::SumSet, "sumset"),
            };
            let cfg = ZnzConfig { eps, max_steps, trials, seed: ctx.seed, goal, ..ZnzConfig::default() };
            let t = runtime(roth_znz_driver(&a, &cfg, &ctx.constants))?;
            let result = report::znz_trace(a.group(), &t);
            if let Some(p) = &trace {
                runtime(write_json(p, &result))?;
            }
            let inputs = json!({ "set": file, "eps": eps, "goal": goal_name, "max_steps": max_steps, "trials": trials });
            let env = ctx.emit("roth-znz", inputs, result);
            Ok(Output { headline: format!("{} steps", t.steps.len()), envelope: env, ok: true })
        }
        Cmd::ThreeSum { n, set, density, eps, max_steps, trials } => {
            check_eps(eps)?;
            if n == 0 {
                return Err(Fail::Usage(anyhow!("--n must be at least 1")));
            }
            let file = match &set {
                Some(p) => {
                    let f = usage(IntSetFile::load(p))?;
                    if f.n != n {
                        return Err(Fail::Usage(anyhow!("set file has n = {}, expected {n}", f.n)));
                    }
                    f
                }
                None => {
                    if !(density > 0.0 && density <= 1.0) {
                        return Err(Fail::Usage(anyhow!("--density must lie in (0, 1]")));
                    }
                    let mut rng = seeded(ctx.seed, 0);
                    let el = (1..=n).filter(|_| unit(&mut rng) < density).collect();
                    usage(IntSetFile::new(n, el))?
                }
            };
            let cfg = ZnzConfig { eps, max_steps, trials, seed: ctx.seed, ..ZnzConfig::default() };
            let out = runtime(three_sumset_ap_pipeline(&file.elements, n, &cfg, &ctx.constants))?;
            let g = km_core::Group::cyclic(km_core::num::next_prime(n.max(2)) as u32)
                .map_err(|e| Fail::Runtime(e.into()))?;
            let (ok, headline) = match &out {
                ThreeSumOutcome::Success(r) => (true, format!("progression of length {}", r.run.length)),
                ThreeSumOutcome::CheckFailed { stage, .. } => (false, format!("check failed at {stage}")),
            };
            let inputs = json!({ "set": file, "eps": eps, "max_steps": max_steps, "trials": trials });
            let env = ctx.emit("three-sum", inputs, report::three_sum(&g, &out));
            Ok(Output { headline, envelope: env, ok })
        }
        Cmd::Verify { suite, instances, exhaustive, calibrate, replay } => {
            let id = usage(SuiteId::parse(&suite))?;
            let spec = SuiteSpec { suite: id, instances, seed: ctx.seed, exhaustive };
            let inputs = json!(spec);
            if let Some(index) = replay {
                let inst = usage(verify::replay(&spec, index, &ctx.constants))?;
                let (ok, result) = match inst {
                    Some(i) => (i.margin >= 0.0, json!({ "index": index, "margin": i.margin, "instance": i.payload })),
                    None => (true, json!({ "index": index, "skipped": true })),
                };
                let env = ctx.emit("verify", inputs, result);
                return Ok(Output { headline: format!("{id} instance {index}"), envelope: env, ok });
            }
            if calibrate {
                let relaxed = Ledger::relaxed(&ctx.constants);
                let rep = usage(verify::run_suite(&spec, &relaxed, None))?;
                let mut ledger = ctx.ledger.clone();
                let updated = ledger.calibrate(&rep);
                let path = ctx.ledger_path.clone().unwrap_or_else(|| PathBuf::from("constants.json"));
                std::fs::write(&path, ledger.to_json())
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(Fail::Runtime)?;
                let ok = rep.failures.is_empty();
                let result = json!({ "report": rep, "calibrated": updated, "ledger": ledger });
                let env = envelope("verify", &inputs, Some(ctx.seed), &ledger.constants, result);
                return Ok(Output { headline: format!("{id}: calibrated {}", updated.join(", ")), envelope: env, ok });
            }
            let rep = usage(verify::run_suite(&spec, &ctx.constants, Some(&ctx.ledger)))?;
            let headline = format!(
                "{id}: {} ({} checked, {} failures, min margin {})",
                if rep.passed { "PASS" } else { "FAIL" },
                rep.checked,
                rep.failures.len(),
                rep.min_margin.map_or("n/a".to_string(), |m| format!("{m:.3e}")),
            );
            let ok = rep.passed;
            let env = ctx.emit("verify", inputs, json!(rep));
            Ok(Output { headline, envelope: env, ok })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_mode = cli.json;
    let human_count = matches!(cli.cmd, Cmd::CountAps { .. });
    match run(cli) {
        Ok(out) => {
            if json_mode {
                println!("{}", serde_json::to_string_pretty(&out.envelope).expect("serializable"));
            } else if human_count {
                println!("{}", out.headline);
            } else {
                print!("{}", render_human(&out.headline, &out.envelope));
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(Fail::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Fail::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
