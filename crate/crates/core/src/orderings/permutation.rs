//! Permutations of block indices.

use std::fmt;

use super::OrderingError;

/// A bijection `q` on `{1, …, m}` acting on block indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPermutation {
    map: Vec<usize>,
}

impl BlockPermutation {
    /// Builds `q` from its images `q(1), …, q(m)`.
    pub fn new(images: Vec<usize>) -> Result<Self, OrderingError> {
        let m = images.len();
        if m == 0 {
            return Err(OrderingError::InvalidPermutation("empty permutation".into()));
        }
        let mut seen = vec![false; m];
        for &v in &images {
            if v == 0 || v > m || seen[v - 1] {
                return Err(OrderingError::InvalidPermutation(format!("{images:?} is not a bijection on 1..={m}")));
            }
            seen[v - 1] = true;
        }
        Ok(Self { map: images })
    }

    /// The identity on `{1, …, m}`.
    pub fn identity(m: usize) -> Self {
        Self { map: (1..=m).collect() }
    }

    /// The reversal `ẽ: k ↦ m + 1 − k`.
    pub fn reversal(m: usize) -> Self {
        Self { map: (1..=m).rev().collect() }
    }

    /// Size of the underlying set.
    pub fn m(&self) -> usize {
        self.map.len()
    }

    /// Image `q(k)` of a 1-based index.
    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.map[k - 1]
    }

    /// Images `q(1), …, q(m)`.
    pub fn images(&self) -> &[usize] {
        &self.map
    }

    /// The inverse permutation.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v - 1] = k + 1;
        }
        Self { map: inv }
    }

    /// The composition `self ∘ other`, i.e. `k ↦ self(other(k))`.
    pub fn compose(&self, other: &BlockPermutation) -> Self {
        assert_eq!(self.m(), other.m(), "permutations act on different sets");
        Self { map: other.map.iter().map(|&k| self.apply(k)).collect() }
    }

    /// `true` for the identity.
    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(k, &v)| v == k + 1)
    }

    /// All `m!` permutations in lexicographic order of their image lists.
    pub fn all(m: usize) -> Vec<BlockPermutation> {
        let mut cur: Vec<usize> = (1..=m).collect();
        let mut out = vec![Self { map: cur.clone() }];
        while next_permutation(&mut cur) {
            out.push(Self { map: cur.clone() });
        }
        out
    }
}

/// Advances `v` to the next permutation in lexicographic order; returns
/// `false` (leaving `v` unchanged) when `v` is the last one.
pub(crate) fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl fmt::Display for BlockPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
