//! Bohr sets `{x : |1 - γ(x)| ≤ ν(γ) for all γ ∈ Γ}`, their dilates,
//! regularity, joins, frequency dilation and progression extraction.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::func::{mu_of_set, ProbMeasure};
use crate::group::{check_same, Group};
use crate::num::{self, lcm, mod_inverse};
use crate::set::GSet;
use crate::{KmError, Result};

/// Relative slack at width boundaries; ties count as members.
pub const WIDTH_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum Regularity {
    Unknown,
    Regular { margin: f64 },
    Irregular { margin: f64 },
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, Regularity::Regular { .. })
    }

    pub fn margin(&self) -> Option<f64> {
        match *self {
            Regularity::Unknown => None,
            Regularity::Regular { margin } | Regularity::Irregular { margin } => Some(margin),
        }
    }
}

/// `start, start + step, …` with `length` terms (indices into the group).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApRun {
    pub start: usize,
    pub step: usize,
    pub length: usize,
}

impl ApRun {
    pub fn terms(&self, group: &Group) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.length);
        let mut x = self.start;
        for _ in 0..self.length {
            out.push(x);
            x = group.add(x, self.step);
        }
        out
    }

    pub fn inside(&self, group: &Group, set: &GSet) -> bool {
        self.terms(group).iter().all(|&x| set.contains(x))
    }
}

/// `|1 - γ(x)| = 2 sin(π ‖t/L‖)` where `t/L` is the phase of `γ(x)`.
struct Phases {
    l: u64,
    mult: Vec<u64>,
}

impl Phases {
    fn new(group: &Group) -> Self {
        let l = group
            .orders()
            .iter()
            .fold(1u64, |acc, &m| lcm(acc, m as u64).expect("bounded by size"));
        let mult = group.orders().iter().map(|&m| l / m as u64).collect();
        Phases { l, mult }
    }

    fn dist(&self, group: &Group, gamma: usize, x: usize) -> f64 {
        let mut t = 0u64;
        for (j, &m) in group.orders().iter().enumerate() {
            let m = m as u64;
            let p = (group.coord(gamma, j) as u64 * group.coord(x, j) as u64) % m;
            t = (t + p * self.mult[j]) % self.l;
        }
        let t = t.min(self.l - t);
        2.0 * libm::sin(PI * t as f64 / self.l as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BohrSet {
    group: Group,
    freqs: Vec<usize>,
    widths: Vec<f64>,
    members: GSet,
    regularity: Regularity,
}

impl BohrSet {
    /// Builds `Bohr_ν(Γ)`; repeated frequencies keep the smallest width.
    pub fn new(group: &Group, freqs: Vec<usize>, widths: Vec<f64>) -> Result<Self> {
        if freqs.len() != widths.len() {
            return Err(KmError::LengthMismatch {
                freqs: freqs.len(),
                widths: widths.len(),
            });
        }
        if freqs.is_empty() {
            return Err(KmError::EmptyFrequencySet);
        }
        let mut fs: Vec<usize> = Vec::new();
        let mut ws: Vec<f64> = Vec::new();
        for (&f, &w) in freqs.iter().zip(&widths) {
            if !(0.0..=2.0).contains(&w) {
                return Err(KmError::WidthOutOfRange(w));
            }
            if f >= group.size() {
                return Err(KmError::InvalidElement(alloc::format!("frequency index {f}")));
            }
            match fs.iter().position(|&g| g == f) {
                Some(i) => ws[i] = ws[i].min(w),
                None => {
                    fs.push(f);
                    ws.push(w);
                }
            }
        }
        let members = membership(group, &fs, &ws, 1.0);
        Ok(BohrSet {
            group: group.clone(),
            freqs: fs,
            widths: ws,
            members,
            regularity: Regularity::Unknown,
        })
    }

    /// The whole group as a Bohr set: trivial character, width 2.
    pub fn whole(group: &Group) -> Self {
        Self::new(group, vec![0], vec![2.0]).expect("valid")
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn freqs(&self) -> &[usize] {
        &self.freqs
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn rank(&self) -> usize {
        self.freqs.len()
    }

    pub fn members(&self) -> &GSet {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.card()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x)
    }

    pub fn density(&self) -> f64 {
        self.members.density()
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// `μ_B`.
    pub fn measure(&self) -> ProbMeasure {
        mu_of_set(&self.members).expect("0 is always a member")
    }

    /// `B_ρ`: same frequencies, widths `ρν` clamped to 2.
    pub fn dilate(&self, rho: f64) -> Result<BohrSet> {
        if !rho.is_finite() || rho <= 0.0 {
            return Err(KmError::InvalidDilation(rho));
        }
        let widths: Vec<f64> = self.widths.iter().map(|&w| (w * rho).min(2.0)).collect();
        let members = membership(&self.group, &self.freqs, &widths, 1.0);
        Ok(BohrSet {
            group: self.group.clone(),
            freqs: self.freqs.clone(),
            widths,
            members,
            regularity: Regularity::Unknown,
        })
    }

    /// `r(x) = max_γ |1 - γ(x)| / ν(γ)`, so that `x ∈ B_ρ` iff `r(x) ≤ ρ`
    /// (up to the boundary tolerance). Zero widths give 0 or infinity.
    pub fn radii(&self) -> Vec<f64> {
        let ph = Phases::new(&self.group);
        (0..self.group.size())
            .map(|x| {
                let mut r: f64 = 0.0;
                for (&f, &w) in self.freqs.iter().zip(&self.widths) {
                    let d = ph.dist(&self.group, f, x);
                    let q = if w > 0.0 {
                        d / w
                    } else if d == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    r = r.max(q);
                }
                r
            })
            .collect()
    }

    /// Decides regularity exactly by scanning the breakpoints of
    /// `κ -> |B_{1+κ}|` in `|κ| ≤ 1/(R d)`.
    pub fn is_regular(&self, reg_const: f64) -> Regularity {
        let mut r = self.radii();
        r.sort_by(f64::total_cmp);
        regularity_of_sorted(&r, 1.0, reg_const, self.rank())
    }

    /// Returns a copy carrying the decided regularity.
    pub fn certify(mut self, reg_const: f64) -> BohrSet {
        self.regularity = self.is_regular(reg_const);
        self
    }

    /// The largest `ρ ∈ [1/2, 1]` from a descending grid, refined to the
    /// midpoints between breakpoints, for which `B_ρ` is regular.
    pub fn regular_dilate(&self, reg_const: f64) -> Result<(f64, BohrSet)> {
        let d = self.rank();
        let mut r = self.radii();
        r.sort_by(f64::total_cmp);
        let h = 1.0 / (4.0 * reg_const * d as f64);
        let mut candidates: Vec<f64> = Vec::new();
        let mut j = 0u32;
        loop {
            let rho = 1.0 - j as f64 * h;
            if rho < 0.5 {
                break;
            }
            candidates.push(rho);
            j += 1;
        }
        let lo = r.partition_point(|&x| x < 0.5);
        let hi = r.partition_point(|&x| x <= 1.0);
        let mut bps: Vec<f64> = r[lo..hi].to_vec();
        bps.dedup();
        for w in bps.windows(2) {
            candidates.push((w[0] + w[1]) / 2.0);
        }
        candidates.push(0.5);
        candidates.sort_by(|a, b| b.total_cmp(a));
        candidates.dedup();
        for rho in candidates {
            if regularity_of_sorted(&r, rho, reg_const, d).is_regular() {
                let b = self.dilate(rho)?.certify(reg_const);
                if b.regularity.is_regular() {
                    return Ok((rho, b));
                }
            }
        }
        Err(KmError::RegularSearchFailed(alloc::format!(
            "rank {d}, size {}, group size {}",
            self.size(),
            self.group.size()
        )))
    }

    /// The Bohr set whose members are `k·B`: each `γ` becomes `γ(k⁻¹ ·)`.
    pub fn freq_dilate(&self, k: i64) -> Result<BohrSet> {
        let g = &self.group;
        if !g.coprime_to_size(k) {
            return Err(KmError::NotCoprime { k, size: g.size() });
        }
        let inv: Vec<u64> = g
            .orders()
            .iter()
            .map(|&m| mod_inverse(k, m as u64).unwrap_or(0))
            .collect();
        let freqs: Vec<usize> = self
            .freqs
            .iter()
            .map(|&f| {
                let coords: Vec<u32> = (0..g.rank())
                    .map(|j| {
                        let m = g.orders()[j] as u64;
                        ((g.coord(f, j) as u64 * inv[j]) % m) as u32
                    })
                    .collect();
                g.index_of(&crate::Element(coords)).expect("reduced")
            })
            .collect();
        let members = self.members.dilate(k)?;
        Ok(BohrSet {
            group: g.clone(),
            freqs,
            widths: self.widths.clone(),
            members,
            regularity: self.regularity,
        })
    }

    /// `Γ ∪ Γ'` with the smaller width on shared frequencies.
    pub fn join(&self, other: &BohrSet) -> Result<BohrSet> {
        check_same(&self.group, &other.group)?;
        let mut freqs = self.freqs.clone();
        freqs.extend_from_slice(&other.freqs);
        let mut widths = self.widths.clone();
        widths.extend_from_slice(&other.widths);
        BohrSet::new(&self.group, freqs, widths)
    }

    /// Longest progression inside `B` with step in `B \ {0}`, for prime
    /// cyclic groups.
    pub fn extract_ap(&self) -> Result<ApRun> {
        if self.group.prime_cyclic().is_none() {
            return Err(KmError::NonPrimeModulus(alloc::format!("{}", self.group)));
        }
        Ok(self.best_ap_run())
    }

    /// The same scan without the primality requirement; no length guarantee.
    pub fn best_ap_run(&self) -> ApRun {
        let mut best = ApRun {
            start: 0,
            step: 0,
            length: 1,
        };
        for x in self.members.iter().filter(|&x| x != 0) {
            let run = longest_run_with_step(&self.members, x);
            if run.length > best.length {
                best = run;
            }
        }
        best
    }

    /// `max(1, ⌊1/ρ⌋)` with `ρ = 4 (2/|B|)^{1/d}`.
    pub fn ap_lemma_bound(&self) -> usize {
        ap_lemma_bound(self.size(), self.rank())
    }
}

pub fn ap_lemma_bound(size: usize, rank: usize) -> usize {
    let rho = 4.0 * num::powf(2.0 / size as f64, 1.0 / rank as f64);
    (num::floor(1.0 / rho) as usize).max(1)
}

fn membership(group: &Group, freqs: &[usize], widths: &[f64], rho: f64) -> GSet {
    let ph = Phases::new(group);
    GSet::from_fn(group, |x| {
        freqs
            .iter()
            .zip(widths)
            .all(|(&f, &w)| ph.dist(group, f, x) <= w * rho * (1.0 + WIDTH_TOL))
    })
}

/// Regularity of `B_ρ` from the sorted radii of `B`.
fn regularity_of_sorted(sorted: &[f64], rho: f64, reg_const: f64, d: usize) -> Regularity {
    let scale = rho * (1.0 + WIDTH_TOL);
    // |B_{ρ s}| = #{r ≤ ρ s (1 + tol)}
    let size_at = |s: f64| sorted.partition_point(|&r| r <= scale * s);
    let below = |s: f64| sorted.partition_point(|&r| r < scale * s);
    let b = size_at(1.0) as f64;
    let rd = reg_const * d as f64;
    let kmax = 1.0 / rd;
    let mut margin = f64::INFINITY;
    let mut check = |slack: f64| margin = margin.min(slack / b);

    check(2.0 * b - size_at(1.0 + kmax) as f64);
    check(size_at(1.0 - kmax) as f64);
    // jump points κ_i = r_i / scale - 1
    let lo = sorted.partition_point(|&r| r <= scale * (1.0 - kmax));
    let hi = sorted.partition_point(|&r| r <= scale * (1.0 + kmax));
    let mut i = lo;
    while i < hi {
        let r = sorted[i];
        let kappa = r / scale - 1.0;
        if kappa > 0.0 {
            check((1.0 + rd * kappa) * b - size_at(1.0 + kappa) as f64);
        } else {
            check(below(1.0 + kappa) as f64 - (1.0 + rd * kappa) * b);
        }
        while i < hi && sorted[i] == r {
            i += 1;
        }
    }
    if margin >= 0.0 {
        Regularity::Regular { margin }
    } else {
        Regularity::Irregular { margin }
    }
}

/// The longest run `s, s + x, …` inside `set` for a fixed nonzero step,
/// scanning each coset of `⟨x⟩` as a cycle; ties go to the smallest start.
pub fn longest_run_with_step(set: &GSet, step: usize) -> ApRun {
    let g = set.group();
    let ord = g.element_order(step) as usize;
    let mut seen = vec![false; g.size()];
    let mut best = ApRun {
        start: 0,
        step,
        length: 0,
    };
    for base in 0..g.size() {
        if seen[base] {
            continue;
        }
        let mut cyc = Vec::with_capacity(ord);
        let mut x = base;
        for _ in 0..ord {
            seen[x] = true;
            cyc.push(x);
            x = g.add(x, step);
        }
        let inside: Vec<bool> = cyc.iter().map(|&y| set.contains(y)).collect();
        if inside.iter().all(|&b| b) {
            let start = *cyc.iter().min().expect("nonempty");
            consider(&mut best, start, ord);
            continue;
        }
        // rotate so the scan starts right after a non-member
        let gap = inside.iter().position(|&b| !b).expect("some gap");
        let mut run_start = None;
        let mut len = 0;
        for k in 1..=ord {
            let j = (gap + k) % ord;
            if inside[j] {
                if len == 0 {
                    run_start = Some(cyc[j]);
                }
                len += 1;
            } else {
                if let Some(s) = run_start.take() {
                    consider(&mut best, s, len);
                }
                len = 0;
            }
        }
    }
    best
}

fn consider(best: &mut ApRun, start: usize, length: usize) {
    if length > best.length || (length == best.length && start < best.start) {
        best.start = start;
        best.length = length;
    }
}

/// Convenience for building from a single frequency list on `Z_N`.
pub fn cyclic_bohr(n: u32, freqs: &[u32], widths: &[f64]) -> Result<BohrSet> {
    let g = Group::cyclic(n)?;
    let fs = freqs.iter().map(|&f| (f % n) as usize).collect();
    BohrSet::new(&g, fs, widths.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(b: &BohrSet) -> Vec<usize> {
        b.members().to_vec()
    }

    #[test]
    fn build_examples() {
        assert_eq!(cyclic_bohr(12, &[1], &[2.0]).unwrap().size(), 12);
        let b = cyclic_bohr(12, &[1], &[1.0]).unwrap();
        assert_eq!(members(&b), vec![0, 1, 2, 10, 11]);
        assert_eq!(cyclic_bohr(12, &[0], &[0.0]).unwrap().size(), 12);
        assert!(matches!(
            cyclic_bohr(12, &[1, 2], &[1.0]),
            Err(KmError::LengthMismatch { .. })
        ));
        assert!(matches!(
            cyclic_bohr(12, &[1], &[2.5]),
            Err(KmError::WidthOutOfRange(_))
        ));
        assert_eq!(cyclic_bohr(12, &[], &[]), Err(KmError::EmptyFrequencySet));
    }

    #[test]
    fn dilate_examples() {
        let b = cyclic_bohr(12, &[1], &[1.0]).unwrap();
        assert_eq!(members(&b.dilate(1.0).unwrap()), members(&b));
        assert_eq!(members(&b.dilate(0.5).unwrap()), vec![0]);
        assert!(b.dilate(0.0).is_err());
        assert_eq!(b.dilate(3.0).unwrap().size(), 12);
    }

    #[test]
    fn z101_interval() {
        let b = cyclic_bohr(101, &[1], &[0.5]).unwrap();
        let want: Vec<usize> = (0..=8).chain(93..101).collect();
        assert_eq!(members(&b), want);
        let run = b.extract_ap().unwrap();
        assert_eq!(run.length, 17);
        assert_eq!(run.step, 1);
        assert!(run.inside(b.group(), b.members()));
        assert_eq!(b.ap_lemma_bound(), 2);
    }

    #[test]
    fn extract_ap_edge_cases() {
        let b = cyclic_bohr(101, &[1], &[0.0]).unwrap();
        assert_eq!(
            b.extract_ap().unwrap(),
            ApRun {
                start: 0,
                step: 0,
                length: 1
            }
        );
        let c = cyclic_bohr(12, &[1], &[1.0]).unwrap();
        assert!(matches!(c.extract_ap(), Err(KmError::NonPrimeModulus(_))));
        assert_eq!(c.best_ap_run().length, 5);
    }

    #[test]
    fn freq_dilate_examples() {
        let b = cyclic_bohr(12, &[1], &[1.0]).unwrap();
        let d = b.freq_dilate(5).unwrap();
        assert_eq!(members(&d), vec![0, 2, 5, 7, 10]);
        let fresh = BohrSet::new(b.group(), d.freqs().to_vec(), d.widths().to_vec()).unwrap();
        assert_eq!(fresh.members(), d.members());
        assert_eq!(members(&b.freq_dilate(1).unwrap()), members(&b));
        assert!(b.freq_dilate(3).is_err());
    }

    #[test]
    fn join_is_intersection() {
        let g = Group::cyclic(12).unwrap();
        let b = cyclic_bohr(12, &[1, 5], &[1.0, 1.5]).unwrap();
        let c = cyclic_bohr(12, &[5, 3], &[0.7, 1.2]).unwrap();
        let j = b.join(&c).unwrap();
        assert_eq!(j.members(), &b.members().intersection(c.members()));
        assert_eq!(j.rank(), 3);
        assert_eq!(j.widths()[1], 0.7);
        let w = b.join(&BohrSet::whole(&g)).unwrap();
        assert_eq!(w.members(), b.members());
    }

    /// Independent oracle: sweep κ finely and compare sizes directly.
    fn brute_regular(b: &BohrSet, reg: f64) -> bool {
        let d = b.rank() as f64;
        let kmax = 1.0 / (reg * d);
        let base = b.size() as f64;
        let steps = 600;
        (0..=steps).all(|i| {
            let kappa = -kmax + 2.0 * kmax * i as f64 / steps as f64;
            let sz = b.dilate(1.0 + kappa).unwrap().size() as f64;
            sz <= (1.0 + reg * d * kappa.abs()) * base + 1e-9
                && sz >= (1.0 - reg * d * kappa.abs()) * base - 1e-9
        })
    }

    #[test]
    fn regularity_matches_sweep() {
        let mut disagreements = 0;
        for n in [12u32, 31, 101] {
            for f in 1..4 {
                for wi in 1..20 {
                    let w = wi as f64 * 0.1;
                    let b = cyclic_bohr(n, &[f], &[w]).unwrap();
                    let exact = b.is_regular(100.0).is_regular();
                    if exact != brute_regular(&b, 100.0) {
                        disagreements += 1;
                    }
                }
            }
        }
        // a finite sweep can only miss violations, never invent them
        assert!(disagreements <= 3, "{disagreements}");
    }

    #[test]
    fn whole_group_is_regular() {
        let g = Group::cyclic(12).unwrap();
        assert!(BohrSet::whole(&g).is_regular(100.0).is_regular());
    }

    #[test]
    fn irregular_instance_on_z12() {
        let found = (1..200).any(|i| {
            let b = cyclic_bohr(12, &[1], &[i as f64 * 0.01]).unwrap();
            matches!(b.is_regular(100.0), Regularity::Irregular { margin } if margin < 0.0)
        });
        assert!(found);
    }

    #[test]
    fn regular_dilate_z101() {
        let b = cyclic_bohr(101, &[1], &[1.0]).unwrap();
        let (rho, r) = b.regular_dilate(100.0).unwrap();
        assert!((0.5..=1.0).contains(&rho));
        assert!(r.regularity().is_regular());
        assert!(r.members().is_subset(b.members()));
    }

    #[test]
    fn longest_run_wraps_and_ties() {
        let g = Group::cyclic(7).unwrap();
        let s = GSet::from_indices(&g, [0, 2, 4, 5]);
        let r = longest_run_with_step(&s, 2);
        assert_eq!((r.start, r.length), (5, 4));
        let full = GSet::full(&g);
        assert_eq!(longest_run_with_step(&full, 3).length, 7);
    }
}
