//! Block partitions, block views, the embedding `E(i, j, Û)`, the vectorization
//! `vec_π` with its inverse on matrices with zero diagonal blocks, and the
//! pivot-zeroing map `N_ij`.
//!
//! Block indices are 1-based; element indices are 0-based.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{Matrix, SymmetricMatrix};
use crate::orderings::BlockPermutation;

/// Orthogonality tolerance for [`ElementaryBlockMatrix`] factors.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Errors raised by partition bookkeeping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("a partition needs at least one block")]
    Empty,
    #[error("block {0} has size zero")]
    ZeroBlock(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("block index ({i}, {j}) is invalid for {m} blocks")]
    InvalidBlockIndex { i: usize, j: usize, m: usize },
    #[error("permutation acts on {found} blocks but the partition has {expected}")]
    InvalidPermutation { expected: usize, found: usize },
    #[error("pivot factor is not orthogonal (defect {0:e})")]
    NotOrthogonal(f64),
    #[error("cannot parse partition {0:?}")]
    Parse(String),
}

/// An integer partition `π = (n_1, …, n_m)` of `n` with cumulative offsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    sizes: Vec<usize>,
    starts: Vec<usize>,
}

impl Partition {
    /// Builds `π` from its block sizes.
    pub fn new(sizes: Vec<usize>) -> Result<Self, PartitionError> {
        if sizes.is_empty() {
            return Err(PartitionError::Empty);
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(PartitionError::ZeroBlock(k + 1));
        }
        let mut starts = Vec::with_capacity(sizes.len() + 1);
        let mut acc = 0;
        starts.push(0);
        for &s in &sizes {
            acc += s;
            starts.push(acc);
        }
        Ok(Self { sizes, starts })
    }

    /// `m` blocks of equal size `b`.
    pub fn uniform(m: usize, b: usize) -> Result<Self, PartitionError> {
        Self::new(vec![b; m])
    }

    /// The element-wise partition `(1, …, 1)` of `n`.
    pub fn ones(n: usize) -> Result<Self, PartitionError> {
        Self::new(vec![1; n])
    }

    /// Matrix order `n`.
    pub fn n(&self) -> usize {
        self.starts[self.sizes.len()]
    }

    /// Number of blocks `m`.
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    /// Block sizes `n_1, …, n_m`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Size `n_i` of block `i`.
    pub fn size(&self, i: usize) -> usize {
        self.sizes[i - 1]
    }

    /// Cumulative sum `s_i = n_1 + … + n_i` (with `s_0 = 0`).
    pub fn cumulative(&self, i: usize) -> usize {
        self.starts[i]
    }

    /// Number of off-diagonal block pairs `M = m(m−1)/2`.
    pub fn num_pairs(&self) -> usize {
        self.m() * (self.m() - 1) / 2
    }

    /// Number of strictly upper-triangular entries `N = n(n−1)/2`.
    pub fn num_upper_entries(&self) -> usize {
        self.n() * (self.n().saturating_sub(1)) / 2
    }

    /// Dimension `K = N − Σ n_i(n_i−1)/2` of the vectorized off-diagonal part.
    pub fn vec_len(&self) -> usize {
        self.num_upper_entries() - self.sizes.iter().map(|&s| s * (s - 1) / 2).sum::<usize>()
    }

    /// `true` when every block has size one.
    pub fn is_elementwise(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1)
    }

    /// Element indices of block `i`.
    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.starts[i - 1]..self.starts[i]
    }

    /// Element indices of the pivot submatrix for `idx` (one block if `i = j`).
    pub fn pivot_indices(&self, idx: BlockIndex) -> Vec<usize> {
        let mut v: Vec<usize> = self.block_range(idx.i).collect();
        if idx.j != idx.i {
            v.extend(self.block_range(idx.j));
        }
        v
    }

    /// Block that contains element index `t`.
    pub fn block_of(&self, t: usize) -> usize {
        self.starts.partition_point(|&s| s <= t)
    }

    /// Segment number `τ(i, j) = (j−1)(j−2)/2 + i` of block `(i, j)`, `i < j`, in the vec layout.
    pub fn tau(i: usize, j: usize) -> usize {
        (j - 1) * (j - 2) / 2 + i
    }

    /// Offset of segment `(i, j)` inside a vector of length `K`.
    pub fn segment_offset(&self, i: usize, j: usize) -> usize {
        let mut off = 0;
        for jj in 2..=self.m() {
            for ii in 1..jj {
                if (ii, jj) == (i, j) {
                    return off;
                }
                off += self.size(ii) * self.size(jj);
            }
        }
        panic!("segment ({i}, {j}) does not exist for m = {}", self.m());
    }

    /// Range of segment `(i, j)` inside a vector of length `K`.
    pub fn segment_range(&self, i: usize, j: usize) -> Range<usize> {
        let off = self.segment_offset(i, j);
        off..off + self.size(i) * self.size(j)
    }

    /// The leading partition `π_l = (n_1, …, n_l)`.
    pub fn prefix(&self, l: usize) -> Partition {
        Partition::new(self.sizes[..l].to_vec()).expect("prefix of a valid partition")
    }

    /// The partition `(n_m, …, n_1)`.
    pub fn reversed(&self) -> Partition {
        Partition::new(self.sizes.iter().rev().copied().collect()).expect("reversal of a valid partition")
    }

    /// The partition in which block `r` of `self` sits at position `q(r)`.
    ///
    /// This is the partition that goes with the relabeled ordering `O(q)`:
    /// running the method on `(π, O)` is the same as running it on
    /// `(π.relabeled(q), O(q))` after the element permutation of
    /// [`block_permutation_matrix`].
    pub fn relabeled(&self, q: &BlockPermutation) -> Partition {
        assert_eq!(q.m(), self.m(), "permutation and partition sizes differ");
        let mut sizes = vec![0; self.m()];
        for r in 1..=self.m() {
            sizes[q.apply(r) - 1] = self.size(r);
        }
        Partition::new(sizes).expect("relabeling of a valid partition")
    }

    /// `true` when `boundary` is one of the cumulative sums `s_0, …, s_m`.
    pub fn has_boundary(&self, boundary: usize) -> bool {
        self.starts.contains(&boundary)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "pi:{}", parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    /// Parses `pi:2,2,2,2` (the `pi:` prefix is optional).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim().strip_prefix("pi:").unwrap_or(s.trim());
        let sizes = body
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PartitionError::Parse(s.to_string()))?;
        Partition::new(sizes)
    }
}

/// A block pivot `(i, j)` with 1-based indices and `i ≤ j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockIndex {
    pub i: usize,
    pub j: usize,
}

impl BlockIndex {
    /// Validates `1 ≤ i ≤ j ≤ m`.
    pub fn new(i: usize, j: usize, m: usize) -> Result<Self, PartitionError> {
        if i == 0 || i > j || j > m {
            return Err(PartitionError::InvalidBlockIndex { i, j, m });
        }
        Ok(Self { i, j })
    }

    /// `true` for an off-diagonal pivot (`i < j`).
    pub fn is_off_diagonal(&self) -> bool {
        self.i < self.j
    }
}

impl From<(usize, usize)> for BlockIndex {
    fn from((i, j): (usize, usize)) -> Self {
        Self { i, j }
    }
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

fn check_index(p: &Partition, idx: BlockIndex) -> Result<(), PartitionError> {
    BlockIndex::new(idx.i, idx.j, p.m()).map(|_| ())
}

/// An orthogonal pivot factor `Û` together with its pivot position.
///
/// `Û` has order `n_i + n_j` (or `n_i` when `i = j`) and is partitioned as
/// `[[U_ii, U_ij], [U_ji, U_jj]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryBlockMatrix {
    partition: Partition,
    pivot: BlockIndex,
    hat_u: Matrix,
}

impl ElementaryBlockMatrix {
    /// Wraps `Û`, checking its order and orthogonality.
    pub fn new(partition: Partition, pivot: BlockIndex, hat_u: Matrix) -> Result<Self, PartitionError> {
        let f = Self::new_unchecked_orthogonality(partition, pivot, hat_u)?;
        let defect = f.hat_u.orthogonality_defect();
        if defect > ORTHOGONALITY_TOL {
            return Err(PartitionError::NotOrthogonal(defect));
        }
        Ok(f)
    }

    /// Wraps a square pivot factor of the right order without the
    /// orthogonality check (used for J-orthogonal factors).
    pub fn new_unchecked_orthogonality(
        partition: Partition,
        pivot: BlockIndex,
        hat_u: Matrix,
    ) -> Result<Self, PartitionError> {
        check_index(&partition, pivot)?;
        let order = pivot_order(&partition, pivot);
        if hat_u.rows() != order || hat_u.cols() != order {
            return Err(PartitionError::DimensionMismatch { expected: order, found: hat_u.rows() });
        }
        Ok(Self { partition, pivot, hat_u })
    }

    /// The partition.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The pivot pair.
    pub fn pivot(&self) -> BlockIndex {
        self.pivot
    }

    /// The pivot factor `Û`.
    pub fn hat_u(&self) -> &Matrix {
        &self.hat_u
    }

    /// Size `n_i` of the leading block.
    pub fn ni(&self) -> usize {
        self.partition.size(self.pivot.i)
    }

    /// Size `n_j` of the trailing block (zero for a diagonal pivot).
    pub fn nj(&self) -> usize {
        if self.pivot.is_off_diagonal() {
            self.partition.size(self.pivot.j)
        } else {
            0
        }
    }

    /// Block `U_ii`.
    pub fn u_ii(&self) -> Matrix {
        self.hat_u.submatrix(0, 0, self.ni(), self.ni())
    }

    /// Block `U_ij`.
    pub fn u_ij(&self) -> Matrix {
        self.hat_u.submatrix(0, self.ni(), self.ni(), self.nj())
    }

    /// Block `U_ji`.
    pub fn u_ji(&self) -> Matrix {
        self.hat_u.submatrix(self.ni(), 0, self.nj(), self.ni())
    }

    /// Block `U_jj`.
    pub fn u_jj(&self) -> Matrix {
        self.hat_u.submatrix(self.ni(), self.ni(), self.nj(), self.nj())
    }

    /// The same pivot with factor `Ûᵀ`.
    pub fn transposed(&self) -> Self {
        Self { partition: self.partition.clone(), pivot: self.pivot, hat_u: self.hat_u.transpose() }
    }

    /// The full `n × n` matrix `E(i, j, Û)`.
    pub fn embed(&self) -> Matrix {
        embed(&self.partition, self.pivot, &self.hat_u).expect("validated on construction")
    }
}

fn pivot_order(p: &Partition, idx: BlockIndex) -> usize {
    if idx.i == idx.j {
        p.size(idx.i)
    } else {
        p.size(idx.i) + p.size(idx.j)
    }
}

/// Embeds `Û` into the identity of order `n` at the rows and columns of blocks `i` and `j`.
pub fn embed(p: &Partition, idx: BlockIndex, hat_u: &Matrix) -> Result<Matrix, PartitionError> {
    check_index(p, idx)?;
    let order = pivot_order(p, idx);
    if hat_u.rows() != order || hat_u.cols() != order {
        return Err(PartitionError::DimensionMismatch { expected: order, found: hat_u.rows() });
    }
    let rows = p.pivot_indices(idx);
    let mut u = Matrix::identity(p.n());
    for (a, &ra) in rows.iter().enumerate() {
        for (b, &rb) in rows.iter().enumerate() {
            u.set(ra, rb, hat_u.get(a, b));
        }
    }
    Ok(u)
}

/// The pivot submatrix `[[A_ii, A_ij], [A_ijᵀ, A_jj]]` (or `A_ii` when `i = j`).
pub fn extract_pivot_submatrix(
    a: &SymmetricMatrix,
    p: &Partition,
    idx: BlockIndex,
) -> Result<SymmetricMatrix, PartitionError> {
    check_index(p, idx)?;
    if a.n() != p.n() {
        return Err(PartitionError::DimensionMismatch { expected: p.n(), found: a.n() });
    }
    Ok(a.principal_submatrix(&p.pivot_indices(idx)))
}

/// Vectorized off-diagonal part of a symmetric matrix in double column-wise order.
#[derive(Clone, Debug, PartialEq)]
pub struct VecImage {
    partition: Partition,
    data: Vec<f64>,
}

impl VecImage {
    /// Wraps a vector of length `K`.
    pub fn new(partition: Partition, data: Vec<f64>) -> Result<Self, PartitionError> {
        if data.len() != partition.vec_len() {
            return Err(PartitionError::LengthMismatch { expected: partition.vec_len(), found: data.len() });
        }
        Ok(Self { partition, data })
    }

    /// The zero vector.
    pub fn zeros(partition: Partition) -> Self {
        let k = partition.vec_len();
        Self { partition, data: vec![0.0; k] }
    }

    /// Unit vector `e_k`.
    pub fn unit(partition: Partition, k: usize) -> Self {
        let mut v = Self::zeros(partition);
        v.data[k] = 1.0;
        v
    }

    /// The partition that fixes the layout.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Raw entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Consumes the image, returning the raw entries.
    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// The entries `col(A_ij)` of segment `(i, j)`.
    pub fn segment(&self, i: usize, j: usize) -> &[f64] {
        &self.data[self.partition.segment_range(i, j)]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// `vec_π(A)`: concatenation of `col(A_1j), …, col(A_{j−1,j})` for `j = 2, …, m`.
pub fn vec_pi(a: &SymmetricMatrix, p: &Partition) -> Result<VecImage, PartitionError> {
    if a.n() != p.n() {
        return Err(PartitionError::DimensionMismatch { expected: p.n(), found: a.n() });
    }
    let mut data = Vec::with_capacity(p.vec_len());
    for j in 2..=p.m() {
        for i in 1..j {
            for c in p.block_range(j) {
                for r in p.block_range(i) {
                    data.push(a.get(r, c));
                }
            }
        }
    }
    Ok(VecImage { partition: p.clone(), data })
}

/// Inverse of `vec_π` on symmetric matrices with zero diagonal blocks.
pub fn vec0_inverse(a: &VecImage) -> SymmetricMatrix {
    let p = &a.partition;
    let mut out = SymmetricMatrix::zeros(p.n());
    let mut k = 0;
    for j in 2..=p.m() {
        for i in 1..j {
            for c in p.block_range(j) {
                for r in p.block_range(i) {
                    out.set(r, c, a.data[k]);
                    k += 1;
                }
            }
        }
    }
    out
}

/// `N_ij(A)`: a copy of `A` with blocks `A_ii`, `A_ij`, `A_ji`, `A_jj` set to zero.
pub fn annihilate_pivot(
    a: &SymmetricMatrix,
    p: &Partition,
    idx: BlockIndex,
) -> Result<SymmetricMatrix, PartitionError> {
    check_index(p, idx)?;
    if a.n() != p.n() {
        return Err(PartitionError::DimensionMismatch { expected: p.n(), found: a.n() });
    }
    let mut out = a.clone();
    let rows = p.pivot_indices(idx);
    for &r in &rows {
        for &c in &rows {
            out.set(r, c, 0.0);
        }
    }
    Ok(out)
}

/// Element permutation induced by a block relabeling: index `u` of block `r`
/// of `p` maps to index `u` of block `q(r)` of `p.relabeled(q)`.
pub fn element_permutation(p: &Partition, q: &BlockPermutation) -> Result<Vec<usize>, PartitionError> {
    if q.m() != p.m() {
        return Err(PartitionError::InvalidPermutation { expected: p.m(), found: q.m() });
    }
    let target = p.relabeled(q);
    let mut map = vec![0; p.n()];
    for r in 1..=p.m() {
        let dst = target.block_range(q.apply(r)).start;
        for (u, t) in p.block_range(r).enumerate() {
            map[t] = dst + u;
        }
    }
    Ok(map)
}

/// Permutation matrix `P` with `P·e_t = e_{p(t)}` for the element permutation
/// `p` of [`element_permutation`].
///
/// For `X` partitioned by `p.relabeled(q)`, the product `PᵀXP` is partitioned
/// by `p` and its block `(s, t)` equals `X_{q(s)q(t)}`. Equivalently, block
/// `(s, t)` of `A` becomes block `(q(s), q(t))` of `PAPᵀ`.
pub fn block_permutation_matrix(p: &Partition, q: &BlockPermutation) -> Result<Matrix, PartitionError> {
    let map = element_permutation(p, q)?;
    let mut out = Matrix::zeros(p.n(), p.n());
    for (t, &pt) in map.iter().enumerate() {
        out.set(pt, t, 1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_for_four_blocks_of_two() {
        let p = Partition::uniform(4, 2).unwrap();
        assert_eq!((p.n(), p.m(), p.num_pairs(), p.num_upper_entries(), p.vec_len()), (8, 4, 6, 28, 24));
    }

    #[test]
    fn rejects_zero_block_and_empty() {
        assert_eq!(Partition::new(vec![2, 0]), Err(PartitionError::ZeroBlock(2)));
        assert_eq!(Partition::new(vec![]), Err(PartitionError::Empty));
    }

    #[test]
    fn parses_and_displays() {
        let p: Partition = "pi:3,2,1,2".parse().unwrap();
        assert_eq!(p.sizes(), &[3, 2, 1, 2]);
        assert_eq!(p.to_string(), "pi:3,2,1,2");
        assert!("pi:2,x".parse::<Partition>().is_err());
    }

    #[test]
    fn tau_matches_segment_order() {
        let p = Partition::ones(5).unwrap();
        for j in 2..=5 {
            for i in 1..j {
                assert_eq!(p.segment_offset(i, j) + 1, Partition::tau(i, j));
            }
        }
    }

    #[test]
    fn block_lookup() {
        let p = Partition::new(vec![3, 2, 1, 2]).unwrap();
        let blocks: Vec<usize> = (0..8).map(|t| p.block_of(t)).collect();
        assert_eq!(blocks, vec![1, 1, 1, 2, 2, 3, 4, 4]);
    }

    #[test]
    fn vec_layout_for_three_scalars() {
        let p = Partition::ones(3).unwrap();
        let mut a = SymmetricMatrix::zeros(3);
        a.set(0, 1, 1.0);
        a.set(0, 2, 2.0);
        a.set(1, 2, 3.0);
        assert_eq!(vec_pi(&a, &p).unwrap().data(), &[1.0, 2.0, 3.0]);
        assert_eq!(vec0_inverse(&vec_pi(&a, &p).unwrap()), a);
    }

    #[test]
    fn vec_image_length_is_checked() {
        let p = Partition::new(vec![2, 1, 2]).unwrap();
        assert!(matches!(VecImage::new(p, vec![0.0; 3]), Err(PartitionError::LengthMismatch { expected: 8, .. })));
    }

    #[test]
    fn annihilating_everything_when_m_is_two() {
        let p = Partition::ones(2).unwrap();
        let a = SymmetricMatrix::from_lower_fn(2, |i, j| (i + j + 1) as f64);
        let z = annihilate_pivot(&a, &p, BlockIndex { i: 1, j: 2 }).unwrap();
        assert_eq!(z, SymmetricMatrix::zeros(2));
    }

    #[test]
    fn reversal_permutation_matrix_is_antidiagonal() {
        let p = Partition::ones(4).unwrap();
        let m = block_permutation_matrix(&p, &BlockPermutation::reversal(4)).unwrap();
        let expected = Matrix::from_fn(4, 4, |i, j| if i + j == 3 { 1.0 } else { 0.0 });
        assert_eq!(m, expected);
    }
}
