use alloc::vec::Vec;

use crate::error::{KmError, Result};
use crate::group::Group;
use crate::set::GSet;

fn check_range(a: &[u64], n: u64) -> Result<()> {
    for &v in a {
        if v == 0 || v > n {
            return Err(KmError::OutOfRange { value: v, n });
        }
    }
    Ok(())
}

fn cyclic_u64(m: u64) -> Result<Group> {
    let m = u32::try_from(m).map_err(|_| KmError::SizeOverflow {
        size: m as u128,
        cap: u32::MAX as usize,
    })?;
    Group::cyclic(m)
}

/// `A ⊆ [1, n]` inside `Z_{3n+1}`. No sum `x + z` or `2y` wraps around, so
/// progressions in the image are exactly the integer progressions.
pub fn embed_interval(a: &[u64], n: u64) -> Result<(Group, GSet)> {
    check_range(a, n)?;
    let g = cyclic_u64(3 * n + 1)?;
    let set = GSet::from_indices(&g, a.iter().map(|&v| v as usize));
    Ok((g, set))
}

/// `A ⊆ [1, n]` reduced modulo `m`.
pub fn embed_mod(a: &[u64], n: u64, m: u64) -> Result<(Group, GSet)> {
    check_range(a, n)?;
    let g = cyclic_u64(m)?;
    let set = GSet::from_indices(&g, a.iter().map(|&v| (v % m) as usize));
    Ok((g, set))
}

/// Ordered pairs `(x, y)` in `A` with `2y - x ∈ A`, trivial ones included.
pub fn integer_3ap_count(a: &[u64]) -> u64 {
    let mut v: Vec<u64> = a.to_vec();
    v.sort_unstable();
    v.dedup();
    let mut count = 0;
    for &x in &v {
        for &y in &v {
            let z = 2 * y as i128 - x as i128;
            if z > 0 && v.binary_search(&(z as u64)).is_ok() {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_preserves_counts() {
        let a = [1u64, 3, 5];
        let (g, s) = embed_interval(&a, 5).unwrap();
        assert_eq!(g.size(), 16);
        assert_eq!(s.count_3aps(), 5);
        assert_eq!(integer_3ap_count(&a), 5);
        let b = [1u64, 2, 4, 7, 8, 9];
        assert_eq!(embed_interval(&b, 9).unwrap().1.count_3aps(), integer_3ap_count(&b));
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(
            embed_interval(&[0], 5),
            Err(KmError::OutOfRange { value: 0, n: 5 })
        ));
        assert!(embed_interval(&[6], 5).is_err());
    }
}
