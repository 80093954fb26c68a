use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ClassifyError, Result};

/// Sizes of the contiguous groups of sorted observations, left to right.
///
/// Every part is at least one and the parts sum to `n`. The ordering is
/// lexicographic on the parts, which is what `BTreeMap` keys rely on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(ClassifyError::InvalidComposition("no parts".into()));
        }
        if let Some(i) = parts.iter().position(|&p| p == 0) {
            return Err(ClassifyError::InvalidComposition(format!(
                "part {i} is zero"
            )));
        }
        Ok(Self(parts))
    }

    /// The single-group composition `(n)`.
    pub fn single(n: usize) -> Self {
        assert!(n >= 1);
        Self(vec![n])
    }

    /// The all-singletons composition `(1, ..., 1)`.
    pub fn singletons(n: usize) -> Self {
        assert!(n >= 1);
        Self(vec![1; n])
    }

    /// Decode a cut mask: bit `g` set means a group boundary between sorted
    /// points `g` and `g + 1`, for `g` in `0..n-1`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        debug_assert!((1..=64).contains(&n));
        let mut parts = Vec::with_capacity(mask.count_ones() as usize + 1);
        let mut current = 1;
        for g in 0..n - 1 {
            if mask >> g & 1 == 1 {
                parts.push(current);
                current = 1;
            } else {
                current += 1;
            }
        }
        parts.push(current);
        Self(parts)
    }

    /// Inverse of [`Composition::from_mask`].
    pub fn to_mask(&self) -> u64 {
        let mut mask = 0u64;
        let mut offset = 0;
        for &p in &self.0[..self.0.len() - 1] {
            offset += p;
            mask |= 1 << (offset - 1);
        }
        mask
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn into_parts(self) -> Vec<usize> {
        self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of groups with more than one observation (the splittable ones).
    pub fn splittable_count(&self) -> usize {
        self.0.iter().filter(|&&p| p > 1).count()
    }

    /// `(start, len)` of each group in sorted order.
    pub fn groups(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().scan(0usize, |offset, &len| {
            let start = *offset;
            *offset += len;
            Some((start, len))
        })
    }

    /// Split part `part` into `(at, parts[part] - at)`.
    pub fn split(&self, part: usize, at: usize) -> Self {
        let size = self.0[part];
        assert!(at >= 1 && at < size, "split point {at} outside 1..{size}");
        let mut parts = Vec::with_capacity(self.0.len() + 1);
        parts.extend_from_slice(&self.0[..part]);
        parts.push(at);
        parts.push(size - at);
        parts.extend_from_slice(&self.0[part + 1..]);
        Self(parts)
    }

    /// Merge parts `pair` and `pair + 1`.
    pub fn merge(&self, pair: usize) -> Self {
        assert!(pair + 1 < self.0.len());
        let mut parts = Vec::with_capacity(self.0.len() - 1);
        parts.extend_from_slice(&self.0[..pair]);
        parts.push(self.0[pair] + self.0[pair + 1]);
        parts.extend_from_slice(&self.0[pair + 2..]);
        Self(parts)
    }

    /// Replace the adjacent pair at `pair` with `(first, total - first)`.
    pub fn reshuffle(&self, pair: usize, first: usize) -> Self {
        let total = self.0[pair] + self.0[pair + 1];
        assert!(first >= 1 && first < total);
        let mut parts = self.0.clone();
        parts[pair] = first;
        parts[pair + 1] = total - first;
        Self(parts)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_and_empty() {
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::new(vec![2, 0, 1]).is_err());
        assert_eq!(Composition::new(vec![4, 6]).unwrap().n(), 10);
    }

    #[test]
    fn mask_round_trip() {
        for n in 1..=8 {
            for mask in 0..(1u64 << (n - 1)) {
                let c = Composition::from_mask(mask, n);
                assert_eq!(c.n(), n);
                assert_eq!(c.to_mask(), mask);
            }
        }
        assert_eq!(Composition::from_mask(0b1000, 10).parts(), &[4, 6]);
    }

    #[test]
    fn split_merge_shuffle() {
        let c = Composition::new(vec![4, 6]).unwrap();
        assert_eq!(c.split(0, 2).parts(), &[2, 2, 6]);
        assert_eq!(c.merge(0).parts(), &[10]);
        assert_eq!(c.reshuffle(0, 7).parts(), &[7, 3]);
        assert_eq!(c.splittable_count(), 2);
        let groups: Vec<_> = c.groups().collect();
        assert_eq!(groups, vec![(0, 4), (4, 6)]);
        assert_eq!(c.to_string(), "(4,6)");
    }
}
