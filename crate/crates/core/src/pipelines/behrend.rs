use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::embed::embed_interval;
use crate::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Integers whose base-3 digits (of `x - 1`) are all 0 or 1.
    Ternary,
    /// Lattice points on a sphere, read as base-`(2m-1)` digits.
    Sphere,
}

/// A subset of `1..=n` without nontrivial three-term progressions.
pub fn behrend(n: u64, strategy: Strategy) -> Vec<u64> {
    if n <= 2 {
        return (1..=n).collect();
    }
    match strategy {
        Strategy::Ternary => ternary(n),
        Strategy::Sphere => sphere(n),
    }
}

fn ternary(n: u64) -> Vec<u64> {
    (0..n)
        .filter(|&v| {
            let mut x = v;
            while x > 0 {
                if x % 3 == 2 {
                    return false;
                }
                x /= 3;
            }
            true
        })
        .map(|v| v + 1)
        .collect()
}

/// Points of `{0..m-1}^d` on the most popular sphere, each mapped to
/// `1 + Σ a_i (2m-1)^i`, keeping values up to `n`. Digits stay below `m`, so
/// sums of two points never carry.
fn sphere_points(n: u64, d: u32, m: u64) -> Vec<u64> {
    let base = 2 * m - 1;
    let mut by_radius: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut digits = alloc::vec![0u64; d as usize];
    'outer: loop {
        let mut value = 0u128;
        let mut r = 0u64;
        for &a in digits.iter().rev() {
            value = value * base as u128 + a as u128;
            r += a * a;
        }
        if value < n as u128 {
            by_radius.entry(r).or_default().push(value as u64 + 1);
        }
        for slot in digits.iter_mut() {
            *slot += 1;
            if *slot < m {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    // most points, then smallest radius
    let mut best: Vec<u64> = Vec::new();
    for (_, pts) in by_radius {
        if pts.len() > best.len() {
            best = pts;
        }
    }
    best.sort_unstable();
    best
}

fn sphere(n: u64) -> Vec<u64> {
    let dmax = num::ceil(num::sqrt(num::ln(n as f64))) as u32 + 2;
    let mut best: Vec<u64> = Vec::new();
    for d in 2..=dmax {
        // largest m with ((2m-1)^d - 1)/2 + 1 ≤ n
        let mut m = 1u64;
        while ((2 * (m + 1) - 1) as f64).powi_checked(d) <= (2 * n - 1) as f64 {
            m += 1;
        }
        for mm in [m, m + 1] {
            if mm < 2 || (mm as f64).powi_checked(d) > 4e6 {
                continue;
            }
            let pts = sphere_points(n, d, mm);
            if pts.len() > best.len() {
                best = pts;
            }
        }
    }
    best
}

trait PowiChecked {
    fn powi_checked(self, d: u32) -> f64;
}

impl PowiChecked for f64 {
    fn powi_checked(self, d: u32) -> f64 {
        libm::pow(self, d as f64)
    }
}

/// Exhaustive check that a subset of `1..=n` has only trivial progressions.
pub fn is_ap_free(a: &[u64], n: u64) -> bool {
    match embed_interval(a, n) {
        Ok((_, set)) => set.count_3aps() == set.card() as u64,
        Err(_) => false,
    }
}
