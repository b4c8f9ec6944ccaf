//! Subsets of a group stored as bitmaps over element indices.

use alloc::vec;
use alloc::vec::Vec;

use crate::group::{check_same, Element, Group};
use crate::{KmError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSet {
    group: Group,
    words: Vec<u64>,
    card: usize,
}

impl GSet {
    pub fn empty(group: &Group) -> Self {
        GSet {
            group: group.clone(),
            words: vec![0; group.size().div_ceil(64)],
            card: 0,
        }
    }

    pub fn full(group: &Group) -> Self {
        Self::from_fn(group, |_| true)
    }

    pub fn from_fn(group: &Group, mut pred: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::empty(group);
        for i in 0..group.size() {
            if pred(i) {
                s.words[i / 64] |= 1 << (i % 64);
                s.card += 1;
            }
        }
        s
    }

    /// Builds a set from indices; repeated indices collapse.
    pub fn from_indices(group: &Group, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(group);
        for i in indices {
            assert!(i < group.size(), "index {i} out of range");
            s.insert(i);
        }
        s
    }

    /// Builds a set from residue tuples, rejecting duplicates and unreduced
    /// coordinates.
    pub fn from_elements(group: &Group, elements: &[Element]) -> Result<Self> {
        let mut s = Self::empty(group);
        for e in elements {
            let i = group.index_of(e)?;
            if !s.insert(i) {
                return Err(KmError::DuplicateElement(alloc::format!("{e}")));
            }
        }
        Ok(s)
    }

    fn insert(&mut self, i: usize) -> bool {
        let (w, b) = (i / 64, 1u64 << (i % 64));
        if self.words[w] & b != 0 {
            return false;
        }
        self.words[w] |= b;
        self.card += 1;
        true
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    /// `|A| / |G|`.
    pub fn density(&self) -> f64 {
        self.card as f64 / self.group.size() as f64
    }

    /// `|A ∩ X| / |X|`.
    pub fn density_in(&self, other: &GSet) -> f64 {
        if other.card == 0 {
            return 0.0;
        }
        self.intersection(other).card as f64 / other.card as f64
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn elements(&self) -> Vec<Element> {
        self.iter().map(|i| self.group.element(i)).collect()
    }

    fn zip_words(&self, other: &GSet, op: impl Fn(u64, u64) -> u64) -> GSet {
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| op(a, b))
            .collect();
        let card = words.iter().map(|w| w.count_ones() as usize).sum();
        GSet {
            group: self.group.clone(),
            words,
            card,
        }
    }

    pub fn intersection(&self, other: &GSet) -> GSet {
        debug_assert_eq!(self.group, other.group);
        self.zip_words(other, |a, b| a & b)
    }

    pub fn union(&self, other: &GSet) -> GSet {
        debug_assert_eq!(self.group, other.group);
        self.zip_words(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &GSet) -> GSet {
        debug_assert_eq!(self.group, other.group);
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> GSet {
        GSet::full(&self.group).difference(self)
    }

    pub fn is_subset(&self, other: &GSet) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    /// `A + t`.
    pub fn translate(&self, t: usize) -> GSet {
        let g = &self.group;
        GSet::from_indices(g, self.iter().map(|a| g.add(a, t)))
    }

    /// `-A`.
    pub fn negate(&self) -> GSet {
        let g = &self.group;
        GSet::from_indices(g, self.iter().map(|a| g.neg(a)))
    }

    /// `k · A = {k a : a ∈ A}`; requires `gcd(k, |G|) = 1`.
    pub fn dilate(&self, k: i64) -> Result<GSet> {
        let g = &self.group;
        if !g.coprime_to_size(k) {
            return Err(KmError::NotCoprime { k, size: g.size() });
        }
        Ok(GSet::from_indices(g, self.iter().map(|a| g.mul(k, a))))
    }

    /// `A + B = {a + b}`.
    pub fn sumset(&self, other: &GSet) -> Result<GSet> {
        check_same(&self.group, &other.group)?;
        let g = &self.group;
        let mut out = GSet::empty(g);
        let b: Vec<usize> = other.to_vec();
        for a in self.iter() {
            for &y in &b {
                out.insert(g.add(a, y));
            }
            if out.card == g.size() {
                break;
            }
        }
        Ok(out)
    }

    /// Number of ordered pairs `(x, d) ∈ G²` with `x, x+d, x+2d ∈ A`.
    ///
    /// Trivial progressions (`d = 0`) are included, contributing `|A|`.
    /// Other solutions of `2d = 0` appear once per qualifying pair as well.
    pub fn count_3aps(&self) -> u64 {
        let g = &self.group;
        let members = self.to_vec();
        let mut count = 0u64;
        for &x in &members {
            for &y in &members {
                let z = g.sub(g.add(y, y), x);
                if self.contains(z) {
                    count += 1;
                }
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32) -> Group {
        Group::cyclic(n).unwrap()
    }

    fn set(g: &Group, xs: &[usize]) -> GSet {
        GSet::from_indices(g, xs.iter().copied())
    }

    #[test]
    fn count_3aps_examples() {
        let g = z(5);
        assert_eq!(GSet::full(&g).count_3aps(), 25);
        assert_eq!(set(&g, &[0, 1]).count_3aps(), 2);
        assert_eq!(set(&g, &[0, 1, 3]).count_3aps(), 5);
    }

    #[test]
    fn count_matches_xd_loop() {
        let g = Group::parse("Z2xZ4").unwrap();
        for mask in 0u32..256 {
            let a = GSet::from_fn(&g, |i| mask >> i & 1 == 1);
            let mut brute = 0;
            for x in 0..g.size() {
                for d in 0..g.size() {
                    let y = g.add(x, d);
                    if a.contains(x) && a.contains(y) && a.contains(g.add(y, d)) {
                        brute += 1;
                    }
                }
            }
            assert_eq!(a.count_3aps(), brute);
        }
    }

    #[test]
    fn dilation() {
        let g = z(5);
        let a = set(&g, &[0, 1, 3]);
        assert_eq!(a.dilate(1).unwrap(), a);
        assert_eq!(a.dilate(2).unwrap(), set(&g, &[0, 2, 1]));
        assert!(matches!(
            set(&z(4), &[1]).dilate(2),
            Err(KmError::NotCoprime { .. })
        ));
    }

    #[test]
    fn sumsets() {
        let g = z(5);
        assert_eq!(set(&g, &[0, 1]).sumset(&set(&g, &[0, 1])).unwrap(), set(&g, &[0, 1, 2]));
        assert!(set(&g, &[0, 1]).sumset(&GSet::empty(&g)).unwrap().is_empty());
        let g6 = z(6);
        let e = set(&g6, &[0, 2, 4]);
        assert_eq!(e.sumset(&e).unwrap(), e);
        assert!(set(&g, &[0]).sumset(&set(&g6, &[0])).is_err());
    }

    #[test]
    fn element_construction_rejects_duplicates() {
        let g = Group::parse("Z5xZ5").unwrap();
        let a = GSet::from_elements(&g, &[Element(vec![0, 1]), Element(vec![2, 3])]).unwrap();
        assert_eq!(a.card(), 2);
        assert!(matches!(
            GSet::from_elements(&g, &[Element(vec![0, 1]), Element(vec![0, 1])]),
            Err(KmError::DuplicateElement(_))
        ));
        assert!(GSet::from_elements(&g, &[Element(vec![5, 1])]).is_err());
    }

    #[test]
    fn set_algebra() {
        let g = z(130);
        let a = GSet::from_fn(&g, |i| i % 3 == 0);
        let b = GSet::from_fn(&g, |i| i % 2 == 0);
        assert_eq!(a.intersection(&b).card(), 22);
        assert_eq!(a.union(&b).card(), 44 + 65 - 22);
        assert_eq!(a.complement().card(), 130 - 44);
        assert!(a.intersection(&b).is_subset(&a));
        assert_eq!(a.iter().count(), a.card());
        assert_eq!(a.translate(1).card(), a.card());
        assert!(a.translate(1).contains(1));
    }
}
