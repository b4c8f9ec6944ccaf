use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::constants::Constants;
use crate::group::{Element, Group};
use crate::km::{density_increment_step, IncrementOutcome, StepConfig, Subspace};
use crate::num;
use crate::set::GSet;
use crate::{KmError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FfqConfig {
    pub eps: f64,
    pub max_steps: usize,
    pub step: StepConfig,
}

impl Default for FfqConfig {
    fn default() -> Self {
        FfqConfig {
            eps: 0.25,
            max_steps: 16,
            step: StepConfig {
                codim_max: 2,
                trials: 20_000,
                seed: 0,
            },
        }
    }
}

/// The affine subspace `offset + span(basis)` of the ambient group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FfqCell {
    pub offset: usize,
    pub basis: Vec<usize>,
}

impl FfqCell {
    pub fn whole(g: &Group) -> Self {
        let n = g.rank();
        let basis = (0..n)
            .map(|j| {
                let mut c = vec![0u32; n];
                c[j] = 1;
                g.index_of(&Element(c)).expect("unit vector")
            })
            .collect();
        FfqCell { offset: 0, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The local copy `F_q^dim` of the cell.
    pub fn local_group(&self, g: &Group) -> Result<Group> {
        let q = g.orders()[0];
        Group::new(vec![q; self.dim()])
    }

    /// Ambient point with local coordinates `y`.
    fn point(&self, g: &Group, y: &[u32]) -> usize {
        let mut x = self.offset;
        for (&c, &b) in y.iter().zip(&self.basis) {
            x = g.add(x, g.mul(c as i64, b));
        }
        x
    }

    fn linear(&self, g: &Group, y: &[u32]) -> usize {
        let mut x = 0;
        for (&c, &b) in y.iter().zip(&self.basis) {
            x = g.add(x, g.mul(c as i64, b));
        }
        x
    }

    pub fn members(&self, g: &Group) -> Result<GSet> {
        let local = self.local_group(g)?;
        Ok(GSet::from_indices(
            g,
            (0..local.size()).map(|y| self.point(g, &local.element(y).0)),
        ))
    }

    /// `A - offset` read in local coordinates.
    pub fn restrict(&self, a: &GSet) -> Result<GSet> {
        let g = a.group();
        let local = self.local_group(g)?;
        Ok(GSet::from_fn(&local, |y| {
            a.contains(self.point(g, &local.element(y).0))
        }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FfqStep {
    /// Cell entered by this step.
    pub cell: FfqCell,
    pub codim: usize,
    pub density_before: f64,
    pub density: f64,
    pub required: f64,
    pub p: u32,
    pub p_prime: u32,
    pub p_sift: u32,
    pub shifts_examined: u64,
    pub smoothed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FfqTerminal {
    /// `⟨μ_A * μ_A, μ_{2·A}⟩` is within `ε` of 1 on the final cell; `aps`
    /// counts the progressions of `A` inside it, trivial ones included.
    NearUniform { inner: f64, aps: u64, cell_size: usize },
    BudgetExceeded { stage: String, detail: String },
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FfqTrace {
    pub eps: f64,
    pub initial_density: f64,
    pub steps: Vec<FfqStep>,
    pub final_cell: FfqCell,
    pub terminal: FfqTerminal,
}

/// Kernel basis of a check matrix in row echelon form, one vector per free
/// column.
fn kernel_basis(checks: &[Vec<u32>], n: usize, q: u32) -> Vec<Vec<u32>> {
    let q64 = q as u64;
    let mut pivots = Vec::new();
    for row in checks {
        let p = row.iter().position(|&v| v != 0).expect("nonzero check row");
        let inv = num::mod_inverse(row[p] as i64, q64).expect("prime field");
        pivots.push((p, inv));
    }
    let mut out = Vec::new();
    for f in 0..n {
        if pivots.iter().any(|&(p, _)| p == f) {
            continue;
        }
        let mut v = vec![0u32; n];
        v[f] = 1;
        for (row, &(p, inv)) in checks.iter().zip(&pivots) {
            let c = row[f] as u64 * inv % q64;
            v[p] = ((q64 - c) % q64) as u32;
        }
        out.push(v);
    }
    out
}

fn budget(stage: &str, e: KmError) -> Result<FfqTerminal> {
    match e {
        KmError::OracleBudgetExceeded { .. }
        | KmError::SiftExhausted { .. }
        | KmError::ConstantBusting { .. } => Ok(FfqTerminal::BudgetExceeded {
            stage: stage.to_string(),
            detail: e.to_string(),
        }),
        other => Err(other),
    }
}

/// Iterates the density increment on `A ⊆ F_q^n` (q odd), passing to a coset
/// of a subspace each time, until `A` is near-uniform in its cell.
pub fn roth_ffq_driver(a: &GSet, cfg: &FfqConfig, k: &Constants) -> Result<FfqTrace> {
    let g = a.group();
    match g.vector_space_prime() {
        Some(q) if q % 2 == 1 => {}
        _ => return Err(KmError::NotVectorSpace(alloc::format!("{g}"))),
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(KmError::InvalidArgument("eps must lie in (0, 1)".into()));
    }
    let q = g.orders()[0];
    let mut cell = FfqCell::whole(g);
    let initial_density = a.density();
    let mut steps = Vec::new();
    let finish = |steps, cell, terminal| {
        Ok(FfqTrace {
            eps: cfg.eps,
            initial_density,
            steps,
            final_cell: cell,
            terminal,
        })
    };
    if a.is_empty() {
        return finish(steps, cell, FfqTerminal::Empty);
    }
    loop {
        let local = cell.restrict(a)?;
        let density = local.density();
        if cell.dim() == 0 || density >= 1.0 {
            let terminal = FfqTerminal::NearUniform {
                inner: 1.0,
                aps: local.count_3aps(),
                cell_size: local.group().size(),
            };
            return finish(steps, cell, terminal);
        }
        let c = local.dilate(2)?;
        let mut step_cfg = cfg.step;
        step_cfg.seed = cfg.step.seed.wrapping_add(steps.len() as u64);
        let out = match density_increment_step(&local, &c, cfg.eps, &step_cfg, k) {
            Ok(o) => o,
            Err(e) => {
                let terminal = budget("increment", e)?;
                return finish(steps, cell, terminal);
            }
        };
        match out {
            IncrementOutcome::NearUniform { inner } => {
                let terminal = FfqTerminal::NearUniform {
                    inner,
                    aps: local.count_3aps(),
                    cell_size: local.group().size(),
                };
                return finish(steps, cell, terminal);
            }
            IncrementOutcome::Increment {
                subspace,
                translate,
                new_density,
                required,
                p,
                p_prime,
                sift,
                smoothed,
            } => {
                if steps.len() >= cfg.max_steps {
                    let terminal = FfqTerminal::BudgetExceeded {
                        stage: "steps".into(),
                        detail: alloc::format!(
                            "increment {} exceeds the step budget",
                            cfg.max_steps + 1
                        ),
                    };
                    return finish(steps, cell, terminal);
                }
                let next = descend(g, &cell, &subspace, translate, q)?;
                steps.push(FfqStep {
                    cell: next.clone(),
                    codim: subspace.codim(),
                    density_before: density,
                    density: new_density,
                    required,
                    p,
                    p_prime,
                    p_sift: sift.drc.p,
                    shifts_examined: sift.drc.examined,
                    smoothed,
                });
                cell = next;
            }
        }
    }
}

fn descend(g: &Group, cell: &FfqCell, v: &Subspace, t: usize, q: u32) -> Result<FfqCell> {
    let local = cell.local_group(g)?;
    let offset = cell.point(g, &local.element(t).0);
    let basis = kernel_basis(&v.checks, cell.dim(), q)
        .iter()
        .map(|y| cell.linear(g, y))
        .collect();
    Ok(FfqCell { offset, basis })
}

/// Rechecks a trace against `A`: nested cells of the stated dimension,
/// recorded densities, and the increment bound at every step.
pub fn replay_ffq(a: &GSet, trace: &FfqTrace, k: &Constants) -> Result<()> {
    let g = a.group();
    let fail = |msg: String| Err(KmError::Hypothesis(msg));
    let mut prev = GSet::full(g);
    let mut prev_density = a.density();
    if (prev_density - trace.initial_density).abs() > 1e-12 {
        return fail("initial density mismatch".into());
    }
    let q = g.orders()[0] as usize;
    for (i, s) in trace.steps.iter().enumerate() {
        let members = s.cell.members(g)?;
        if members.card() != q.pow(s.cell.dim() as u32) {
            return fail(alloc::format!("step {i}: basis is dependent"));
        }
        if !members.is_subset(&prev) {
            return fail(alloc::format!("step {i}: cell not nested"));
        }
        let d = a.density_in(&members);
        if (d - s.density).abs() > 1e-12 {
            return fail(alloc::format!("step {i}: density {d} != {}", s.density));
        }
        let required = (1.0 + trace.eps / k.c_inc) * prev_density;
        if d + 1e-12 < required {
            return fail(alloc::format!("step {i}: density {d} below {required}"));
        }
        prev = members;
        prev_density = d;
    }
    if trace.steps.last().map(|s| &s.cell) != Some(&trace.final_cell) && !trace.steps.is_empty() {
        return fail("final cell differs from last step".into());
    }
    Ok(())
}
