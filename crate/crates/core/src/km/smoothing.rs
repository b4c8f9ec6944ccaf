use alloc::vec;
use alloc::vec::Vec;

use crate::bohr::BohrSet;
use crate::fourier::dft;
use crate::func::{conv, diffconv, inner_wrt, FuncR};
use crate::group::Group;
use crate::set::GSet;
use crate::{Element, KmError, Result};

use super::mu;

/// A subspace of `F_q^n` given by parity checks in reduced row echelon form,
/// presented as a Bohr set of zero widths.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    pub checks: Vec<Vec<u32>>,
    pub bohr: BohrSet,
}

impl Subspace {
    pub fn from_checks(group: &Group, checks: Vec<Vec<u32>>) -> Result<Subspace> {
        let bohr = if checks.is_empty() {
            BohrSet::new(group, vec![0], vec![0.0])?
        } else {
            let freqs = checks
                .iter()
                .map(|row| group.index_of(&Element(row.clone())))
                .collect::<Result<Vec<_>>>()?;
            let widths = vec![0.0; freqs.len()];
            BohrSet::new(group, freqs, widths)?
        };
        Ok(Subspace { checks, bohr })
    }

    pub fn codim(&self) -> usize {
        self.checks.len()
    }

    pub fn members(&self) -> &GSet {
        self.bohr.members()
    }

    /// `Hx`, the coset label of `x`.
    pub fn syndrome(&self, x: usize) -> Vec<u32> {
        let g = self.bohr.group();
        let q = g.orders()[0] as u64;
        self.checks
            .iter()
            .map(|row| {
                let s: u64 = row
                    .iter()
                    .enumerate()
                    .map(|(j, &h)| h as u64 * g.coord(x, j) as u64)
                    .sum();
                (s % q) as u32
            })
            .collect()
    }
}

/// Outcome of an almost-periodicity search: the smoothing set and the two
/// pairings `⟨μ_V * h, 1_S⟩` and `⟨h, 1_S⟩` for `h = μ_{A1} ∘ μ_{A2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothing<T> {
    pub found: T,
    pub smoothed: f64,
    pub base: f64,
    pub examined: usize,
}

/// All parity-check matrices of rank `c` over `F_q` in reduced row echelon
/// form, each listed once.
fn rref_matrices(q: u32, n: usize, c: usize) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(c);
    pivot_sets(n, c, 0, &mut pivots, &mut |piv| {
        // free entries: row i, columns after its pivot that are not pivots
        let mut slots = Vec::new();
        for (i, &pc) in piv.iter().enumerate() {
            for col in pc + 1..n {
                if !piv.contains(&col) {
                    slots.push((i, col));
                }
            }
        }
        let total = (q as u64).pow(slots.len() as u32);
        for code in 0..total {
            let mut m = vec![vec![0u32; n]; c];
            for (i, &pc) in piv.iter().enumerate() {
                m[i][pc] = 1;
            }
            let mut r = code;
            for &(i, col) in &slots {
                m[i][col] = (r % q as u64) as u32;
                r /= q as u64;
            }
            out.push(m);
        }
    });
    out
}

fn pivot_sets(n: usize, c: usize, from: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == c {
        f(cur);
        return;
    }
    for col in from..n {
        cur.push(col);
        pivot_sets(n, c, col + 1, cur, f);
        cur.pop();
    }
}

/// `⟨μ_V * h, 1_S⟩` from coset sums.
fn smoothed_pairing(v: &Subspace, h: &FuncR, s: &GSet) -> f64 {
    let g = h.group();
    let q = g.orders()[0] as usize;
    let label = |x: usize| {
        v.syndrome(x)
            .iter()
            .fold(0usize, |acc, &d| acc * q + d as usize)
    };
    let cosets = q.pow(v.codim() as u32);
    let mut h_sum = vec![0.0; cosets];
    let mut s_count = vec![0usize; cosets];
    for x in 0..g.size() {
        let l = label(x);
        h_sum[l] += h.value(x);
        if s.contains(x) {
            s_count[l] += 1;
        }
    }
    let vsize = (g.size() / cosets) as f64;
    let total: f64 = h_sum
        .iter()
        .zip(&s_count)
        .map(|(&hs, &sc)| hs / vsize * sc as f64)
        .sum();
    total / g.size() as f64
}

/// The lowest-codimension subspace `V` (codimension at most `codim_max`)
/// with `|⟨μ_V * μ_{A1} ∘ μ_{A2}, 1_S⟩ - ⟨μ_{A1} ∘ μ_{A2}, 1_S⟩| ≤ ε`.
pub fn find_smoothing_subspace(
    a1: &GSet,
    a2: &GSet,
    s: &GSet,
    eps: f64,
    codim_max: usize,
) -> Result<Smoothing<Subspace>> {
    let g = a1.group();
    let q = g
        .vector_space_prime()
        .ok_or_else(|| KmError::NotVectorSpace(alloc::format!("{g}")))?;
    let h = diffconv(mu(a1)?.func(), mu(a2)?.func())?;
    let base = inner_wrt(&h, &FuncR::indicator(s), None)?;
    let n = g.rank();
    let mut best = f64::INFINITY;
    let mut examined = 0;
    for c in 0..=codim_max.min(n) {
        for checks in rref_matrices(q, n, c) {
            examined += 1;
            let v = Subspace::from_checks(g, checks)?;
            let smoothed = smoothed_pairing(&v, &h, s);
            let gap = (smoothed - base).abs();
            if gap <= eps + 1e-12 {
                return Ok(Smoothing {
                    found: v,
                    smoothed,
                    base,
                    examined,
                });
            }
            best = best.min(gap - eps);
        }
    }
    Err(KmError::OracleBudgetExceeded { best_margin: best })
}

/// Search limits for [`find_smoothing_bohr`].
#[derive(Clone, Debug, PartialEq)]
pub struct BohrBudget {
    /// Largest number of extra frequencies joined to `B'`.
    pub freqs: usize,
    /// Widths tried for the extra frequencies, in order.
    pub widths: Vec<f64>,
    /// Candidates smaller than this are skipped.
    pub min_size: usize,
    pub reg_const: f64,
}

impl Default for BohrBudget {
    fn default() -> Self {
        BohrBudget {
            freqs: 3,
            widths: vec![2.0, 1.5, 1.0, 0.75, 0.5, 0.35, 0.25, 0.15, 0.1],
            min_size: 2,
            reg_const: 100.0,
        }
    }
}

/// Nontrivial characters by decreasing `|f̂|`, keeping one of each `±γ`.
fn large_spectrum(f: &FuncR) -> Vec<usize> {
    let g = f.group();
    let spec = dft(f);
    let mut idx: Vec<usize> = (1..g.size()).filter(|&i| i <= g.neg(i)).collect();
    idx.sort_by(|&x, &y| {
        spec.value(y)
            .norm()
            .total_cmp(&spec.value(x).norm())
            .then(x.cmp(&y))
    });
    idx
}

/// Desk-scale stand-in for Bohr almost-periodicity. Candidates are `B'`
/// itself, then joins of `B'` with the `m ≤ budget.freqs` characters where
/// `|μ̂_{A1}|` is largest, at each width of the grid, each regularised.
/// The first candidate `B'' ⊆ B'` whose smoothing moves
/// `⟨μ_{A1} ∘ μ_{A2}, 1_S⟩` by at most `ε` is returned.
#[allow(clippy::too_many_arguments)]
pub fn find_smoothing_bohr(
    b: &BohrSet,
    b_prime: &BohrSet,
    a1: &GSet,
    a2: &GSet,
    s: &GSet,
    eps: f64,
    budget: &BohrBudget,
) -> Result<Smoothing<BohrSet>> {
    if !a1.is_subset(b.members()) {
        return Err(KmError::Hypothesis("A1 is not inside B".into()));
    }
    if s.card() > 2 * b.size() {
        return Err(KmError::Hypothesis("|S| exceeds 2|B|".into()));
    }
    let h = diffconv(mu(a1)?.func(), mu(a2)?.func())?;
    let ind_s = FuncR::indicator(s);
    let base = inner_wrt(&h, &ind_s, None)?;
    let mut best = f64::INFINITY;
    let mut examined = 0;
    let mut try_one = |cand: BohrSet, best: &mut f64| -> Result<Option<Smoothing<BohrSet>>> {
        if cand.size() < budget.min_size || !cand.members().is_subset(b_prime.members()) {
            return Ok(None);
        }
        examined += 1;
        let sm = conv(cand.measure().func(), &h)?;
        let smoothed = inner_wrt(&sm, &ind_s, None)?;
        let gap = (smoothed - base).abs();
        if gap <= eps + 1e-12 {
            return Ok(Some(Smoothing {
                found: cand,
                smoothed,
                base,
                examined,
            }));
        }
        *best = best.min(gap - eps);
        Ok(None)
    };
    if let Some(hit) = try_one(b_prime.clone(), &mut best)? {
        return Ok(hit);
    }
    let spectrum = large_spectrum(mu(a1)?.func());
    for m in 1..=budget.freqs.min(spectrum.len()) {
        for &w in &budget.widths {
            let extra = BohrSet::new(b.group(), spectrum[..m].to_vec(), vec![w; m])?;
            let joined = b_prime.join(&extra)?;
            let cand = match joined.regular_dilate(budget.reg_const) {
                Ok((_, r)) => r,
                Err(_) => continue,
            };
            if let Some(hit) = try_one(cand, &mut best)? {
                return Ok(hit);
            }
        }
    }
    Err(KmError::OracleBudgetExceeded { best_margin: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_counts_are_gaussian_binomials() {
        assert_eq!(rref_matrices(3, 2, 0).len(), 1);
        assert_eq!(rref_matrices(3, 2, 1).len(), 4);
        assert_eq!(rref_matrices(3, 3, 1).len(), 13);
        assert_eq!(rref_matrices(3, 3, 2).len(), 13);
        assert_eq!(rref_matrices(5, 3, 1).len(), 31);
    }

    #[test]
    fn whole_group_needs_no_smoothing() {
        let g = Group::parse("F3^2").unwrap();
        let full = GSet::full(&g);
        let s = GSet::from_indices(&g, [0, 4]);
        let r = find_smoothing_subspace(&full, &full, &s, 0.01, 2).unwrap();
        assert_eq!(r.found.codim(), 0);
    }

    #[test]
    fn line_smooths_at_codim_one() {
        let g = Group::parse("F3^2").unwrap();
        // the line {(0, t)}
        let line = GSet::from_indices(&g, [0, 1, 2]);
        let r = find_smoothing_subspace(&line, &line, &line, 1e-9, 2).unwrap();
        assert!(r.found.codim() <= 1);
        assert!((r.smoothed - r.base).abs() < 1e-12);
    }

    #[test]
    fn codim_zero_budget_can_fail() {
        let g = Group::parse("F3^2").unwrap();
        let line = GSet::from_indices(&g, [0, 1, 2]);
        assert!(matches!(
            find_smoothing_subspace(&line, &line, &line, 1e-9, 0),
            Err(KmError::OracleBudgetExceeded { .. })
        ));
    }

    #[test]
    fn subspace_members_match_checks() {
        let g = Group::parse("F3^3").unwrap();
        for c in 0..=3 {
            for checks in rref_matrices(3, 3, c) {
                let v = Subspace::from_checks(&g, checks).unwrap();
                assert_eq!(v.members().card(), 27 / 3usize.pow(c as u32));
                for x in 0..27 {
                    assert_eq!(v.members().contains(x), v.syndrome(x).iter().all(|&d| d == 0));
                }
            }
        }
    }

    #[test]
    fn bohr_accepts_b_prime_when_already_smooth() {
        let g = Group::cyclic(31).unwrap();
        let b = BohrSet::new(&g, vec![1], vec![1.0]).unwrap();
        let bp = b.dilate(0.3).unwrap();
        let r = find_smoothing_bohr(&b, &bp, b.members(), bp.members(), b.members(), 1.0, &BohrBudget::default()).unwrap();
        assert_eq!(r.found, bp);
    }
}
