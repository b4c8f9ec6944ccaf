//! Finite abelian groups presented as products of cyclic factors.
//!
//! Elements are indexed lexicographically: the first coordinate is the most
//! significant digit, so in `Z4xZ6` the element `(1, 2)` has index `1*6 + 2`.
//! The dual group is identified with the same coordinate tuples, the tuple
//! `g` naming the character `x -> exp(2 pi i sum_j g_j x_j / m_j)`.

use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::num;
use crate::{KmError, Result};

/// Default cap on the number of cells of a group.
pub const DEFAULT_SIZE_CAP: usize = 1 << 26;

/// A residue tuple; the same shape names group elements and characters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Element(pub Vec<u32>);

impl Element {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug)]
struct Inner {
    orders: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
}

/// A finite abelian group `Z_{m_1} x ... x Z_{m_r}`.
///
/// Cheap to clone; two groups are equal when their orders agree.
#[derive(Clone, Debug)]
pub struct Group(Arc<Inner>);

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.orders == other.0.orders
    }
}

impl Eq for Group {}

impl Group {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        Self::with_cap(orders, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(orders: Vec<u32>, cap: usize) -> Result<Self> {
        let mut size: u128 = 1;
        for &m in &orders {
            if m == 0 {
                return Err(KmError::ZeroOrder);
            }
            size = size.saturating_mul(m as u128);
        }
        if size > cap as u128 {
            return Err(KmError::SizeOverflow { size, cap });
        }
        let mut strides = alloc::vec![0usize; orders.len()];
        let mut s = 1usize;
        for j in (0..orders.len()).rev() {
            strides[j] = s;
            s *= orders[j] as usize;
        }
        Ok(Group(Arc::new(Inner {
            orders,
            strides,
            size: size as usize,
        })))
    }

    /// The cyclic group `Z_n`.
    pub fn cyclic(n: u32) -> Result<Self> {
        Self::new(alloc::vec![n])
    }

    /// Parses `factor ("x" factor)*` with `factor := ("Z"|"F") INT ["^" INT]`.
    pub fn parse(spec: &str) -> Result<Self> {
        Self::parse_with_cap(spec, DEFAULT_SIZE_CAP)
    }

    pub fn parse_with_cap(spec: &str, cap: usize) -> Result<Self> {
        let err = |reason: &str| KmError::GroupParse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = spec.trim();
        if trimmed.is_empty() {
            return Err(err("empty spec"));
        }
        let mut orders = Vec::new();
        for factor in trimmed.split('x') {
            let factor = factor.trim();
            let (field, body) = match factor.as_bytes().first() {
                Some(b'Z') => (false, &factor[1..]),
                Some(b'F') => (true, &factor[1..]),
                _ => return Err(err("factor must start with Z or F")),
            };
            let (base, exp) = match body.split_once('^') {
                Some((b, e)) => (b, e),
                None => (body, "1"),
            };
            let base: u64 = parse_uint(base).ok_or_else(|| err("bad modulus"))?;
            let exp: u64 = parse_uint(exp).ok_or_else(|| err("bad exponent"))?;
            if field && !num::is_prime(base) {
                return Err(err("F_q requires q prime"));
            }
            if base == 0 {
                return Err(KmError::ZeroOrder);
            }
            if base > u32::MAX as u64 {
                return Err(KmError::SizeOverflow {
                    size: base as u128,
                    cap,
                });
            }
            if exp > 64 {
                return Err(KmError::SizeOverflow {
                    size: u128::MAX,
                    cap,
                });
            }
            for _ in 0..exp {
                orders.push(base as u32);
            }
        }
        Self::with_cap(orders, cap)
    }

    pub fn orders(&self) -> &[u32] {
        &self.0.orders
    }

    pub fn rank(&self) -> usize {
        self.0.orders.len()
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    /// `Some(q)` when the group is `Z_q^n` with `q` prime and `n >= 1`.
    pub fn vector_space_prime(&self) -> Option<u32> {
        let q = *self.0.orders.first()?;
        (num::is_prime(q as u64) && self.0.orders.iter().all(|&m| m == q)).then_some(q)
    }

    /// `Some(p)` when the group is cyclic of prime order `p`.
    pub fn prime_cyclic(&self) -> Option<u32> {
        match self.0.orders.as_slice() {
            [p] if num::is_prime(*p as u64) => Some(*p),
            _ => None,
        }
    }

    pub fn coprime_to_size(&self, k: i64) -> bool {
        num::gcd(k.unsigned_abs(), self.0.size as u64) == 1
    }

    pub fn index_of(&self, e: &Element) -> Result<usize> {
        if e.0.len() != self.rank() {
            return Err(KmError::InvalidElement(format!(
                "{e} has length {} but the group has rank {}",
                e.0.len(),
                self.rank()
            )));
        }
        let mut idx = 0;
        for (j, (&c, &m)) in e.0.iter().zip(&self.0.orders).enumerate() {
            if c >= m {
                return Err(KmError::InvalidElement(format!(
                    "{e}: coordinate {j} not reduced mod {m}"
                )));
            }
            idx += c as usize * self.0.strides[j];
        }
        Ok(idx)
    }

    pub fn element(&self, idx: usize) -> Element {
        debug_assert!(idx < self.size());
        Element(
            self.0
                .orders
                .iter()
                .zip(&self.0.strides)
                .map(|(&m, &s)| ((idx / s) % m as usize) as u32)
                .collect(),
        )
    }

    /// Coordinate `j` of the element with index `idx`.
    #[inline]
    pub fn coord(&self, idx: usize, j: usize) -> u32 {
        ((idx / self.0.strides[j]) % self.0.orders[j] as usize) as u32
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        if let [m] = self.0.orders.as_slice() {
            let s = a + b;
            let m = *m as usize;
            return if s >= m { s - m } else { s };
        }
        let mut out = 0;
        for (&m, &st) in self.0.orders.iter().zip(&self.0.strides) {
            let m = m as usize;
            let s = (a / st) % m + (b / st) % m;
            out += if s >= m { s - m } else { s } * st;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        if let [m] = self.0.orders.as_slice() {
            return if a == 0 { 0 } else { *m as usize - a };
        }
        let mut out = 0;
        for (&m, &st) in self.0.orders.iter().zip(&self.0.strides) {
            let m = m as usize;
            let c = (a / st) % m;
            out += if c == 0 { 0 } else { m - c } * st;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// `k * a` for any integer `k`.
    pub fn mul(&self, k: i64, a: usize) -> usize {
        let mut out = 0;
        for (&m, &st) in self.0.orders.iter().zip(&self.0.strides) {
            let c = ((a / st) % m as usize) as u64;
            let kk = num::rem(k, m as u64);
            out += ((kk as u128 * c as u128) % m as u128) as usize * st;
        }
        out
    }

    /// Additive order of the element with index `a`.
    pub fn element_order(&self, a: usize) -> u64 {
        let mut ord = 1u64;
        for (j, &m) in self.0.orders.iter().enumerate() {
            let c = self.coord(a, j) as u64;
            let o = m as u64 / num::gcd(c, m as u64);
            ord = num::lcm(ord, o).unwrap_or(u64::MAX);
        }
        ord
    }

    /// Exponent of the group: least common multiple of the factor orders.
    pub fn exponent(&self) -> Option<u64> {
        self.0
            .orders
            .iter()
            .try_fold(1u64, |acc, &m| num::lcm(acc, m as u64))
    }
}

fn parse_uint(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Group {
    /// Canonical spec string, e.g. `Z3^2xZ5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let orders = &self.0.orders;
        if orders.is_empty() {
            return write!(f, "Z1");
        }
        let mut i = 0;
        let mut first = true;
        while i < orders.len() {
            let mut j = i;
            while j < orders.len() && orders[j] == orders[i] {
                j += 1;
            }
            if !first {
                write!(f, "x")?;
            }
            first = false;
            if j - i == 1 {
                write!(f, "Z{}", orders[i])?;
            } else {
                write!(f, "Z{}^{}", orders[i], j - i)?;
            }
            i = j;
        }
        Ok(())
    }
}

pub(crate) fn check_same(a: &Group, b: &Group) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(KmError::GroupMismatch {
            left: a.to_string(),
            right: b.to_string(),
        })
    }
}
