//! Seeded instance generators.

use km_core::rng::{below, unit, Rng};
use km_core::{num, BohrSet, FuncR, GSet, Group};

pub fn pick<T: Copy>(rng: &mut Rng, xs: &[T]) -> T {
    xs[below(rng, xs.len())]
}

pub fn range(rng: &mut Rng, lo: usize, hi: usize) -> usize {
    lo + below(rng, hi - lo + 1)
}

pub fn real(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

pub fn group(rng: &mut Rng, specs: &[&str]) -> Group {
    Group::parse(pick(rng, specs)).expect("valid spec")
}

/// A nonempty set whose density is drawn from `[lo, hi]`.
pub fn set(rng: &mut Rng, g: &Group, lo: f64, hi: f64) -> GSet {
    let d = real(rng, lo, hi);
    let s = GSet::from_fn(g, |_| unit(rng) < d);
    if s.is_empty() {
        GSet::from_indices(g, [below(rng, g.size())])
    } else {
        s
    }
}

/// A random subset of `within` (possibly empty).
pub fn subset(rng: &mut Rng, within: &GSet, d: f64) -> GSet {
    GSet::from_indices(within.group(), within.iter().filter(|_| unit(rng) < d).collect::<Vec<_>>())
}

pub fn func(rng: &mut Rng, g: &Group) -> FuncR {
    FuncR::new(g, (0..g.size()).map(|_| real(rng, -1.0, 1.0)).collect()).expect("right length")
}

pub fn mask_set(g: &Group, mask: u64) -> GSet {
    GSet::from_fn(g, |i| mask >> i & 1 == 1)
}

/// Number of nonempty subsets of `Z5` and `Z7` together.
pub const SMALL_SUBSETS: usize = 31 + 127;

/// The `i`-th nonempty subset of `Z5`, then of `Z7`.
pub fn small_subset(i: usize) -> GSet {
    if i < 31 {
        mask_set(&Group::cyclic(5).expect("Z5"), i as u64 + 1)
    } else {
        mask_set(&Group::cyclic(7).expect("Z7"), (i - 31) as u64 + 1)
    }
}

pub fn prime_between(rng: &mut Rng, lo: u64, hi: u64) -> u64 {
    let start = lo + below(rng, (hi - lo) as usize) as u64;
    let p = num::next_prime(start);
    if p > hi {
        num::next_prime(lo)
    } else {
        p
    }
}

/// A Bohr set on `Z_n` of rank `1..=max_rank` with nonzero frequencies and
/// widths in `[w_lo, 2]`.
pub fn bohr_on(rng: &mut Rng, n: u64, max_rank: usize, w_lo: f64) -> BohrSet {
    let g = Group::cyclic(n as u32).expect("cyclic");
    let d = range(rng, 1, max_rank);
    let freqs = (0..d).map(|_| 1 + below(rng, g.size() - 1)).collect();
    let widths = (0..d).map(|_| real(rng, w_lo, 2.0)).collect();
    BohrSet::new(&g, freqs, widths).expect("valid Bohr data")
}

/// A certified regular Bohr set on `Z_p` for a prime `p` in `[lo, hi]`.
pub fn regular_bohr(rng: &mut Rng, lo: u64, hi: u64, max_rank: usize, reg_const: f64) -> Option<BohrSet> {
    let p = prime_between(rng, lo, hi);
    let b = bohr_on(rng, p, max_rank, 0.2);
    b.regular_dilate(reg_const).ok().map(|(_, r)| r)
}

/// A regular Bohr set inside `B_rho`.
pub fn regular_narrow(b: &BohrSet, rho: f64, reg_const: f64) -> Option<BohrSet> {
    b.dilate(rho).ok()?.regular_dilate(reg_const).ok().map(|(_, r)| r)
}
