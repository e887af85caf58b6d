//! Pivot sequences and ordering matrices.

use std::fmt;
use std::str::FromStr;

use super::{BlockPermutation, OrderingError};

/// A finite sequence of block pairs `(i, j)`, `1 ≤ i < j ≤ m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PivotSequence {
    m: usize,
    pairs: Vec<(usize, usize)>,
}

impl PivotSequence {
    /// Validates every pair against `m`.
    pub fn new(m: usize, pairs: Vec<(usize, usize)>) -> Result<Self, OrderingError> {
        if m < 2 {
            return Err(OrderingError::TooFewBlocks(m));
        }
        if pairs.is_empty() {
            return Err(OrderingError::Empty);
        }
        for &(i, j) in &pairs {
            if i == 0 || i >= j || j > m {
                return Err(OrderingError::InvalidPair { i, j, m });
            }
        }
        Ok(Self { m, pairs })
    }

    pub(crate) fn from_valid(m: usize, pairs: Vec<(usize, usize)>) -> Self {
        debug_assert!(Self::new(m, pairs.clone()).is_ok());
        Self { m, pairs }
    }

    /// The row-cyclic ordering `(1,2),(1,3),…,(1,m),(2,3),…,(m−1,m)`.
    pub fn row(m: usize) -> Self {
        let pairs = (1..m).flat_map(|i| (i + 1..=m).map(move |j| (i, j))).collect();
        Self::from_valid(m, pairs)
    }

    /// The column-cyclic ordering `(1,2),(1,3),(2,3),(1,4),…,(m−1,m)`.
    pub fn column(m: usize) -> Self {
        let pairs = (2..=m).flat_map(|j| (1..j).map(move |i| (i, j))).collect();
        Self::from_valid(m, pairs)
    }

    /// Reads a cyclic ordering off its ordering matrix.
    pub fn from_ordering_matrix(om: &OrderingMatrix) -> Result<Self, OrderingError> {
        let m = om.m();
        let big_m = m * (m - 1) / 2;
        let mut pairs = vec![(0, 0); big_m];
        for i in 1..=m {
            for j in i + 1..=m {
                let k = om.get(i, j);
                if k < 0 || k as usize >= big_m || pairs[k as usize] != (0, 0) {
                    return Err(OrderingError::NotCyclic);
                }
                pairs[k as usize] = (i, j);
            }
        }
        Self::new(m, pairs)
    }

    /// Number of blocks `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Sequence length `T`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always `false`: sequences are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pairs in order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `M = m(m−1)/2`.
    pub fn num_pairs(&self) -> usize {
        self.m * (self.m - 1) / 2
    }

    /// `true` when every pair of `P_m` occurs at least once.
    pub fn is_covering(&self) -> bool {
        let mut seen = vec![false; self.num_pairs()];
        for &p in &self.pairs {
            seen[letter(p)] = true;
        }
        seen.iter().all(|&s| s)
    }

    /// Cyclic: length `M` and a bijection onto `P_m`.
    pub fn is_cyclic(&self) -> bool {
        self.len() == self.num_pairs() && self.is_covering()
    }

    /// Quasi-cyclic: covering `P_m` (so `T ≥ M`).
    pub fn is_quasi_cyclic(&self) -> bool {
        self.is_covering()
    }

    /// Positions `r` where pairs `r` and `r+1` have disjoint index sets.
    pub fn admissible_positions(&self) -> Vec<usize> {
        (0..self.len().saturating_sub(1)).filter(|&r| independent(self.pairs[r], self.pairs[r + 1])).collect()
    }

    /// The reverse sequence `O←`.
    pub fn reverse(&self) -> Self {
        Self { m: self.m, pairs: self.pairs.iter().rev().copied().collect() }
    }

    /// The relabeled sequence `O(q)`: each `(i, j)` becomes `(q(i), q(j))`
    /// with the smaller index first.
    pub fn relabel(&self, q: &BlockPermutation) -> Self {
        assert_eq!(q.m(), self.m, "permutation acts on a different number of blocks");
        let pairs = self
            .pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (q.apply(i), q.apply(j));
                (a.min(b), a.max(b))
            })
            .collect();
        Self { m: self.m, pairs }
    }

    /// The rotation `[O_2, O_1]` where `O_1` is the first `r` pairs.
    pub fn rotate(&self, r: usize) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.rotate_left(r % self.len());
        Self { m: self.m, pairs }
    }

    /// Letters (indices into `P_m` in column order) of the pairs.
    pub(crate) fn letters(&self) -> Vec<usize> {
        self.pairs.iter().map(|&p| letter(p)).collect()
    }

    pub(crate) fn from_letters(m: usize, letters: &[usize]) -> Self {
        Self { m, pairs: letters.iter().map(|&l| pair_of_letter(l)).collect() }
    }
}

/// `true` when two pairs share no block index.
#[inline]
pub(crate) fn independent(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1
}

/// Column-order index of a pair, `τ(i, j) − 1`.
#[inline]
pub(crate) fn letter((i, j): (usize, usize)) -> usize {
    (j - 1) * (j - 2) / 2 + i - 1
}

pub(crate) fn pair_of_letter(l: usize) -> (usize, usize) {
    let mut j = 2;
    while (j - 1) * j / 2 <= l {
        j += 1;
    }
    (l - (j - 1) * (j - 2) / 2 + 1, j)
}

impl fmt::Display for PivotSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
        write!(f, "pairs:{}", parts.join(","))
    }
}

impl FromStr for PivotSequence {
    type Err = OrderingError;

    /// Parses `pairs:(1,2),(1,3),…` (prefix optional); `m` is the largest index.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().strip_prefix("pairs:").unwrap_or(s.trim());
        let err = || OrderingError::Parse(s.to_string());
        let mut pairs = Vec::new();
        let mut rest = body.trim();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(err)?;
            let close = open.find(')').ok_or_else(err)?;
            let (a, b) = open[..close].split_once(',').ok_or_else(err)?;
            let i = a.trim().parse::<usize>().map_err(|_| err())?;
            let j = b.trim().parse::<usize>().map_err(|_| err())?;
            pairs.push((i, j));
            rest = open[close + 1..].trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
            }
        }
        let m = pairs.iter().map(|&(i, j)| i.max(j)).max().ok_or_else(err)?;
        PivotSequence::new(m, pairs)
    }
}

/// The symmetric matrix `M_O` of a cyclic ordering: `m_{i(k)j(k)} = k`,
/// diagonal entries `−1` (rendered `*`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingMatrix {
    m: usize,
    entries: Vec<i64>,
}

impl OrderingMatrix {
    /// Builds a matrix from rows; the diagonal must hold `−1`.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, OrderingError> {
        let m = rows.len();
        let mut entries = Vec::with_capacity(m * m);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m || row[r] != -1 {
                return Err(OrderingError::Parse(format!("row {r} of ordering matrix")));
            }
            entries.extend_from_slice(row);
        }
        for r in 0..m {
            for s in 0..m {
                if entries[r * m + s] != entries[s * m + r] {
                    return Err(OrderingError::Parse("ordering matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { m, entries })
    }

    /// Order `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Entry `(r, s)`, 1-based.
    pub fn get(&self, r: usize, s: usize) -> i64 {
        self.entries[(r - 1) * self.m + (s - 1)]
    }

    /// The conjugate `Q·M·Qᵀ` with `Q·e_r = e_{q(r)}`.
    pub fn permuted(&self, q: &BlockPermutation) -> Self {
        let m = self.m;
        let mut entries = vec![0; m * m];
        for r in 1..=m {
            for s in 1..=m {
                entries[(q.apply(r) - 1) * m + (q.apply(s) - 1)] = self.get(r, s);
            }
        }
        Self { m, entries }
    }
}

impl fmt::Display for OrderingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.entries.iter().filter(|&&v| v >= 0).map(|v| v.to_string().len()).max().unwrap_or(1);
        for r in 1..=self.m {
            let row: Vec<String> = (1..=self.m)
                .map(|s| {
                    let v = self.get(r, s);
                    let cell = if v < 0 { "*".to_string() } else { v.to_string() };
                    format!("{cell:>width$}")
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// `M_O` for a cyclic ordering.
pub fn ordering_matrix(o: &PivotSequence) -> Result<OrderingMatrix, OrderingError> {
    if !o.is_cyclic() {
        return Err(OrderingError::NotCyclic);
    }
    let m = o.m();
    let mut entries = vec![-1; m * m];
    for (k, &(i, j)) in o.pairs().iter().enumerate() {
        entries[(i - 1) * m + (j - 1)] = k as i64;
        entries[(j - 1) * m + (i - 1)] = k as i64;
    }
    Ok(OrderingMatrix { m, entries })
}
