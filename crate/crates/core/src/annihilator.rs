//! Block Jacobi annihilators `R_ij(Û)` and operators `J_O`.
//!
//! One step of the block method maps the vectorized off-diagonal part
//! `a = vec_π(A)` to `vec_π(N_ij(UᵀAU))`, which is linear in `a`. The map is
//! the annihilator `R_ij(Û)`, a `K × K` matrix that differs from the
//! identity only in the segments of blocks `(r, i)` and `(r, j)` and is zero
//! on segment `(i, j)`. The product of the annihilators of one sweep is the
//! block Jacobi operator `J_O = R_{T−1}⋯R_1R_0`; the rightmost factor belongs
//! to the first pivot pair.

use thiserror::Error;

use crate::linalg::{spectral_norm, spectral_radius, LinalgError, Matrix};
use crate::orderings::{are_equivalent, PivotSequence};
use crate::partition::{vec0_inverse, vec_pi, BlockIndex, ElementaryBlockMatrix, Partition, PartitionError, VecImage};
use crate::BlockPermutation;

/// Largest `K` for which `K × K` matrices are materialized.
pub const MAX_MATERIALIZE: usize = 2000;

/// Errors raised by annihilators and operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnihilatorError {
    #[error("vector was laid out for {found} but the annihilator uses {expected}")]
    PartitionMismatch { expected: String, found: String },
    #[error("the sequence has {expected} pairs but {found} factors were supplied")]
    Alignment { expected: usize, found: usize },
    #[error("factor {position} has pivot ({i}, {j}) but the sequence has ({si}, {sj})")]
    PivotMismatch { position: usize, i: usize, j: usize, si: usize, sj: usize },
    #[error("annihilators act on off-diagonal pivots only, got ({0}, {0})")]
    DiagonalPivot(usize),
    #[error("K = {k} exceeds the materialization limit {max}")]
    TooLarge { k: usize, max: usize },
    #[error("the sequences are not related as declared")]
    WitnessInvalid,
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The annihilator `R_ij(Û)` for an orthogonal pivot factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Annihilator {
    factor: ElementaryBlockMatrix,
}

impl Annihilator {
    /// Builds `R_ij(Û)`; `Û` must be orthogonal of order `n_i + n_j`.
    pub fn new(partition: Partition, pivot: BlockIndex, hat_u: Matrix) -> Result<Self, AnnihilatorError> {
        Self::from_factor(ElementaryBlockMatrix::new(partition, pivot, hat_u)?)
    }

    /// Wraps an existing elementary block matrix.
    pub fn from_factor(factor: ElementaryBlockMatrix) -> Result<Self, AnnihilatorError> {
        if !factor.pivot().is_off_diagonal() {
            return Err(AnnihilatorError::DiagonalPivot(factor.pivot().i));
        }
        Ok(Self { factor })
    }

    /// The partition.
    pub fn partition(&self) -> &Partition {
        self.factor.partition()
    }

    /// The pivot pair `(i, j)`.
    pub fn pivot(&self) -> BlockIndex {
        self.factor.pivot()
    }

    /// The pivot factor `Û`.
    pub fn hat_u(&self) -> &Matrix {
        self.factor.hat_u()
    }

    /// The underlying elementary block matrix.
    pub fn factor(&self) -> &ElementaryBlockMatrix {
        &self.factor
    }

    /// `R_ij(Ûᵀ)`, whose matrix is the transpose of the matrix of `self`.
    pub fn transposed(&self) -> Self {
        Self { factor: self.factor.transposed() }
    }

    /// Computes `R_ij(Û)·a` by block updates.
    ///
    /// For every `r ∉ {i, j}` the blocks in block row `r` become
    /// `A′_ri = A_ri·U_ii + A_rj·U_ji` and `A′_rj = A_ri·U_ij + A_rj·U_jj`;
    /// segment `(i, j)` is set to zero and all other segments are copied.
    pub fn apply(&self, a: &VecImage) -> Result<VecImage, AnnihilatorError> {
        let p = self.partition();
        if a.partition() != p {
            return Err(AnnihilatorError::PartitionMismatch {
                expected: p.to_string(),
                found: a.partition().to_string(),
            });
        }
        let BlockIndex { i, j } = self.pivot();
        let (ni, nj) = (p.size(i), p.size(j));
        let u = self.hat_u();
        let mut out = a.data().to_vec();
        for x in &mut out[p.segment_range(i, j)] {
            *x = 0.0;
        }
        for r in (1..=p.m()).filter(|&r| r != i && r != j) {
            let nr = p.size(r);
            let x_ri = read_block(a, r, i);
            let x_rj = read_block(a, r, j);
            // Y = [X_ri X_rj]·Û, an n_r × (n_i + n_j) block row.
            let mut y = Matrix::zeros(nr, ni + nj);
            for row in 0..nr {
                for c in 0..ni + nj {
                    let mut acc = 0.0;
                    for k in 0..ni {
                        acc += x_ri.get(row, k) * u.get(k, c);
                    }
                    for k in 0..nj {
                        acc += x_rj.get(row, k) * u.get(ni + k, c);
                    }
                    y.set(row, c, acc);
                }
            }
            write_block(p, &mut out, r, i, &y.submatrix(0, 0, nr, ni));
            write_block(p, &mut out, r, j, &y.submatrix(0, ni, nr, nj));
        }
        Ok(VecImage::new(p.clone(), out)?)
    }

    /// Reference action through the dense matrix: `vec_π(N_ij(UᵀAU))` with
    /// `A = vec0⁻¹(a)`. Costs `O(n³)`; used as an oracle.
    pub fn apply_dense(&self, a: &VecImage) -> Result<VecImage, AnnihilatorError> {
        let p = self.partition();
        if a.partition() != p {
            return Err(AnnihilatorError::PartitionMismatch {
                expected: p.to_string(),
                found: a.partition().to_string(),
            });
        }
        let full = vec0_inverse(a).congruence(&self.factor.embed());
        let mut img = vec_pi(&full, p)?.into_data();
        let BlockIndex { i, j } = self.pivot();
        for x in &mut img[p.segment_range(i, j)] {
            *x = 0.0;
        }
        Ok(VecImage::new(p.clone(), img)?)
    }

    /// The explicit `K × K` matrix, assembled from its Kronecker structure.
    ///
    /// With `I` the identity of order `n_r`, the `2 × 2` block pattern acting
    /// on the segments of `r` and the pivot blocks is
    /// * `r < i`: `[[U_iiᵀ⊗I, U_jiᵀ⊗I], [U_ijᵀ⊗I, U_jjᵀ⊗I]]` on `(r,i), (r,j)`;
    /// * `i < r < j`: `[[I⊗U_iiᵀ, S(U_jiᵀ⊗I)], [S̃(I⊗U_ijᵀ), U_jjᵀ⊗I]]` on `(i,r), (r,j)`;
    /// * `r > j`: `[[I⊗U_iiᵀ, I⊗U_jiᵀ], [I⊗U_ijᵀ, I⊗U_jjᵀ]]` on `(i,r), (j,r)`.
    ///
    /// Segment `(i, j)` is zero and every other segment is mapped identically.
    pub fn materialize(&self) -> Result<Matrix, AnnihilatorError> {
        let p = self.partition();
        let k = p.vec_len();
        if k > MAX_MATERIALIZE {
            return Err(AnnihilatorError::TooLarge { k, max: MAX_MATERIALIZE });
        }
        let BlockIndex { i, j } = self.pivot();
        let f = &self.factor;
        let (u_ii_t, u_ij_t, u_ji_t, u_jj_t) =
            (f.u_ii().transpose(), f.u_ij().transpose(), f.u_ji().transpose(), f.u_jj().transpose());
        let mut out = Matrix::identity(k);
        let seg = p.segment_range(i, j);
        for t in seg.clone() {
            out.set(t, t, 0.0);
        }
        for r in (1..=p.m()).filter(|&r| r != i && r != j) {
            let eye = Matrix::identity(p.size(r));
            let (first, second, blocks) = if r < i {
                ((r, i), (r, j), [u_ii_t.kron(&eye), u_ji_t.kron(&eye), u_ij_t.kron(&eye), u_jj_t.kron(&eye)])
            } else if r < j {
                let sh = shuffle_matrices(p.size(i), p.size(r), p.size(j));
                (
                    (i, r),
                    (r, j),
                    [
                        eye.kron(&u_ii_t),
                        sh.s.matmul(&u_ji_t.kron(&eye)),
                        sh.s_tilde.matmul(&eye.kron(&u_ij_t)),
                        u_jj_t.kron(&eye),
                    ],
                )
            } else {
                ((i, r), (j, r), [eye.kron(&u_ii_t), eye.kron(&u_ji_t), eye.kron(&u_ij_t), eye.kron(&u_jj_t)])
            };
            let r1 = p.segment_range(first.0, first.1).start;
            let r2 = p.segment_range(second.0, second.1).start;
            out.set_submatrix(r1, r1, &blocks[0]);
            out.set_submatrix(r1, r2, &blocks[1]);
            out.set_submatrix(r2, r1, &blocks[2]);
            out.set_submatrix(r2, r2, &blocks[3]);
        }
        Ok(out)
    }

    /// The `K × K` matrix assembled column by column from [`Annihilator::apply`].
    pub fn materialize_by_columns(&self) -> Result<Matrix, AnnihilatorError> {
        assemble_columns(self.partition(), |e| self.apply(&e))
    }
}

/// Block `(r, s)` of `vec0⁻¹(a)` as an `n_r × n_s` matrix, `r ≠ s`.
fn read_block(a: &VecImage, r: usize, s: usize) -> Matrix {
    let p = a.partition();
    let (lo, hi) = (r.min(s), r.max(s));
    let seg = a.segment(lo, hi);
    let (rows, cols) = (p.size(lo), p.size(hi));
    // col() is column-major: entry (x, y) of block (lo, hi) sits at x + rows·y.
    let stored = Matrix::from_fn(rows, cols, |x, y| seg[x + rows * y]);
    if r < s {
        stored
    } else {
        stored.transpose()
    }
}

/// Writes `block` as block `(r, s)`, storing its transpose when `r > s`.
fn write_block(p: &Partition, data: &mut [f64], r: usize, s: usize, block: &Matrix) {
    let (lo, hi) = (r.min(s), r.max(s));
    let range = p.segment_range(lo, hi);
    let rows = p.size(lo);
    let stored = if r < s { block.clone() } else { block.transpose() };
    for y in 0..stored.cols() {
        for x in 0..rows {
            data[range.start + x + rows * y] = stored.get(x, y);
        }
    }
}

fn assemble_columns(
    p: &Partition,
    mut f: impl FnMut(VecImage) -> Result<VecImage, AnnihilatorError>,
) -> Result<Matrix, AnnihilatorError> {
    let k = p.vec_len();
    if k > MAX_MATERIALIZE {
        return Err(AnnihilatorError::TooLarge { k, max: MAX_MATERIALIZE });
    }
    let mut out = Matrix::zeros(k, k);
    for c in 0..k {
        let col = f(VecImage::unit(p.clone(), c))?;
        for (r, &v) in col.data().iter().enumerate() {
            out.set(r, c, v);
        }
    }
    Ok(out)
}

/// The commutation matrices of the middle case `i < r < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuffleMatrices {
    /// `S = [I_{n_i}⊗e_1ᵀ; …; I_{n_i}⊗e_{n_r}ᵀ]` with `e_k ∈ ℝ^{n_r}`:
    /// maps `col(Y)` to `col(Yᵀ)` for `Y` of size `n_r × n_i`.
    pub s: Matrix,
    /// `S̃ = [I_{n_r}⊗e_1ᵀ; …; I_{n_r}⊗e_{n_j}ᵀ]` with `e_k ∈ ℝ^{n_j}`:
    /// maps `col(Z)` to `col(Zᵀ)` for `Z` of size `n_j × n_r`.
    pub s_tilde: Matrix,
}

/// `[I_a⊗e_1ᵀ; …; I_a⊗e_bᵀ]` with `e_k ∈ ℝ^b`, a permutation of order `ab`.
fn stacked_shuffle(a: usize, b: usize) -> Matrix {
    let eye = Matrix::identity(a);
    let mut out = Matrix::zeros(a * b, a * b);
    for k in 0..b {
        let e_k = Matrix::from_fn(1, b, |_, c| if c == k { 1.0 } else { 0.0 });
        out.set_submatrix(k * a, 0, &eye.kron(&e_k));
    }
    out
}

/// Builds `S` and `S̃` for block sizes `n_i`, `n_r`, `n_j`.
pub fn shuffle_matrices(ni: usize, nr: usize, nj: usize) -> ShuffleMatrices {
    ShuffleMatrices { s: stacked_shuffle(ni, nr), s_tilde: stacked_shuffle(nr, nj) }
}

/// `J_O`, the product of the annihilators along a pivot sequence.
#[derive(Clone, Debug)]
pub struct OperatorProduct {
    partition: Partition,
    sequence: PivotSequence,
    factors: Vec<Annihilator>,
}

impl OperatorProduct {
    /// Builds `J_O` from one pivot factor per position of `o`.
    pub fn new(p: &Partition, o: &PivotSequence, hat_us: &[Matrix]) -> Result<Self, AnnihilatorError> {
        if hat_us.len() != o.len() {
            return Err(AnnihilatorError::Alignment { expected: o.len(), found: hat_us.len() });
        }
        if o.m() != p.m() {
            return Err(PartitionError::InvalidPermutation { expected: p.m(), found: o.m() }.into());
        }
        let factors = o
            .pairs()
            .iter()
            .zip(hat_us)
            .map(|(&(i, j), u)| Annihilator::new(p.clone(), BlockIndex { i, j }, u.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { partition: p.clone(), sequence: o.clone(), factors })
    }

    /// Builds `J_O` from existing annihilators, checking their pivots.
    pub fn from_factors(o: &PivotSequence, factors: Vec<Annihilator>) -> Result<Self, AnnihilatorError> {
        if factors.len() != o.len() {
            return Err(AnnihilatorError::Alignment { expected: o.len(), found: factors.len() });
        }
        let partition = factors[0].partition().clone();
        for (position, (f, &(si, sj))) in factors.iter().zip(o.pairs()).enumerate() {
            let BlockIndex { i, j } = f.pivot();
            if (i, j) != (si, sj) {
                return Err(AnnihilatorError::PivotMismatch { position, i, j, si, sj });
            }
            if f.partition() != &partition {
                return Err(AnnihilatorError::PartitionMismatch {
                    expected: partition.to_string(),
                    found: f.partition().to_string(),
                });
            }
        }
        Ok(Self { partition, sequence: o.clone(), factors })
    }

    /// The partition.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// The pivot sequence.
    pub fn sequence(&self) -> &PivotSequence {
        &self.sequence
    }

    /// The factors in sequence order (first pivot first).
    pub fn factors(&self) -> &[Annihilator] {
        &self.factors
    }

    /// Applies the factors in sequence order: `R_{T−1}(⋯R_0(a))`.
    pub fn apply(&self, a: &VecImage) -> Result<VecImage, AnnihilatorError> {
        let mut cur = a.clone();
        for f in &self.factors {
            cur = f.apply(&cur)?;
        }
        Ok(cur)
    }

    /// The `K × K` product `R_{T−1}⋯R_0` (requires `K ≤ MAX_MATERIALIZE`).
    pub fn materialize(&self) -> Result<Matrix, AnnihilatorError> {
        let k = self.partition.vec_len();
        if k > MAX_MATERIALIZE {
            return Err(AnnihilatorError::TooLarge { k, max: MAX_MATERIALIZE });
        }
        let mut out = Matrix::identity(k);
        for f in &self.factors {
            out = f.materialize()?.matmul(&out);
        }
        Ok(out)
    }

    /// `‖J_O‖₂`.
    pub fn operator_norm(&self, tol: f64) -> Result<f64, AnnihilatorError> {
        Ok(spectral_norm(&self.materialize()?, tol)?)
    }

    /// Estimate of the spectral radius of `J_O`.
    pub fn spectral_radius(&self, tol: f64) -> Result<f64, AnnihilatorError> {
        Ok(spectral_radius(&self.materialize()?, tol)?)
    }
}

/// `‖J_1 J_2 ⋯ J_k‖₂` for operators on a common partition.
pub fn product_norm(ops: &[OperatorProduct], tol: f64) -> Result<f64, AnnihilatorError> {
    let mut acc: Option<Matrix> = None;
    for op in ops.iter().rev() {
        let m = op.materialize()?;
        acc = Some(match acc {
            None => m,
            Some(prev) => m.matmul(&prev),
        });
    }
    let acc = acc.ok_or(AnnihilatorError::Alignment { expected: 1, found: 0 })?;
    Ok(spectral_norm(&acc, tol)?)
}

/// How two pivot sequences are related in [`check_equivalence`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivalenceRelation {
    /// `O₂ ∼ O₁`: factors travel with their pair occurrences.
    Equivalent,
    /// `O₂ = O₁←`: factors are reversed and transposed.
    Reverse,
    /// `O₂ = O₁(q)` on the relabeled partition.
    Permutation(BlockPermutation),
    /// `O₂` is `O₁` rotated left by the given count.
    Shift(usize),
}

/// Outcome of an operator-level equivalence check.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub relation: EquivalenceRelation,
    /// Max-abs difference for the entrywise identities; spectral-radius gap for shifts.
    pub gap: f64,
    /// `false` for the shift check, whose radius comparison is an estimate.
    pub gating: bool,
}

/// Swaps the block rows and columns of `Û` (order `n_i + n_j` → `n_j + n_i`).
fn swap_pivot_blocks(hat_u: &Matrix, ni: usize) -> Matrix {
    let n = hat_u.rows();
    let perm: Vec<usize> = (ni..n).chain(0..ni).collect();
    Matrix::from_fn(n, n, |r, c| hat_u.get(perm[r], perm[c]))
}

/// The `K × K` permutation `𝐏` with `𝐏·vec_π(A) = vec_π̃(PAPᵀ)`, where
/// `π̃ = p.relabeled(q)` and `P` is the element permutation of `q`.
pub fn vec_permutation(p: &Partition, q: &BlockPermutation) -> Result<Matrix, AnnihilatorError> {
    let target = p.relabeled(q);
    let map = crate::partition::element_permutation(p, q)?;
    let mut inverse = vec![0; map.len()];
    for (t, &pt) in map.iter().enumerate() {
        inverse[pt] = t;
    }
    assemble_columns(p, |e| {
        let a = vec0_inverse(&e);
        let permuted = crate::SymmetricMatrix::from_lower_fn(p.n(), |r, c| a.get(inverse[r], inverse[c]));
        let img = vec_pi(&permuted, &target)?;
        // The image lives on π̃ but has the same length K.
        Ok(VecImage::new(p.clone(), img.into_data())?)
    })
}

/// Checks the operator identity that goes with a relation between `o1` and `o2`.
///
/// `hat_us` are the factors of `J_{O₁}` on partition `p`; the factors of
/// `J_{O₂}` are derived from them according to `relation`:
/// * `Equivalent`: `J_{O₂} = J_{O₁}`;
/// * `Reverse`: `J_{O₂}` built from the transposed factors equals `J_{O₁}ᵀ`;
/// * `Permutation(q)`: `J_{O₂} = 𝐏·J_{O₁}·𝐏ᵀ` on `p.relabeled(q)`;
/// * `Shift(r)`: the spectral radii agree (informational).
pub fn check_equivalence(
    p: &Partition,
    o1: &PivotSequence,
    hat_us: &[Matrix],
    o2: &PivotSequence,
    relation: &EquivalenceRelation,
    tol: f64,
) -> Result<EquivalenceReport, AnnihilatorError> {
    let j1 = OperatorProduct::new(p, o1, hat_us)?;
    let (gap, gating) = match relation {
        EquivalenceRelation::Equivalent => {
            if !are_equivalent(o1, o2) {
                return Err(AnnihilatorError::WitnessInvalid);
            }
            let factors2 = align_occurrences(o1, hat_us, o2);
            let j2 = OperatorProduct::new(p, o2, &factors2)?;
            (j1.materialize()?.max_abs_diff(&j2.materialize()?), true)
        }
        EquivalenceRelation::Reverse => {
            if *o2 != o1.reverse() {
                return Err(AnnihilatorError::WitnessInvalid);
            }
            let factors2: Vec<Matrix> = hat_us.iter().rev().map(Matrix::transpose).collect();
            let j2 = OperatorProduct::new(p, o2, &factors2)?;
            (j1.materialize()?.transpose().max_abs_diff(&j2.materialize()?), true)
        }
        EquivalenceRelation::Permutation(q) => {
            if *o2 != o1.relabel(q) {
                return Err(AnnihilatorError::WitnessInvalid);
            }
            let target = p.relabeled(q);
            let factors2: Vec<Matrix> = o1
                .pairs()
                .iter()
                .zip(hat_us)
                .map(|(&(i, j), u)| if q.apply(i) > q.apply(j) { swap_pivot_blocks(u, p.size(i)) } else { u.clone() })
                .collect();
            let j2 = OperatorProduct::new(&target, o2, &factors2)?;
            let big_p = vec_permutation(p, q)?;
            let conj = big_p.matmul(&j1.materialize()?).matmul(&big_p.transpose());
            (conj.max_abs_diff(&j2.materialize()?), true)
        }
        EquivalenceRelation::Shift(r) => {
            if *o2 != o1.rotate(*r) {
                return Err(AnnihilatorError::WitnessInvalid);
            }
            let mut factors2 = hat_us.to_vec();
            factors2.rotate_left(r % hat_us.len());
            let j2 = OperatorProduct::new(p, o2, &factors2)?;
            ((j1.spectral_radius(tol)? - j2.spectral_radius(tol)?).abs(), false)
        }
    };
    Ok(EquivalenceReport { relation: relation.clone(), gap, gating })
}

/// Reorders `hat_us` (aligned with `o1`) to follow `o2`, matching the k-th
/// occurrence of each pair in `o2` with its k-th occurrence in `o1`.
fn align_occurrences(o1: &PivotSequence, hat_us: &[Matrix], o2: &PivotSequence) -> Vec<Matrix> {
    let mut queues: std::collections::HashMap<(usize, usize), std::collections::VecDeque<&Matrix>> = Default::default();
    for (&pair, u) in o1.pairs().iter().zip(hat_us) {
        queues.entry(pair).or_default().push_back(u);
    }
    o2.pairs()
        .iter()
        .map(|pair| queues.get_mut(pair).and_then(|q| q.pop_front()).expect("sequences are equivalent").clone())
        .collect()
}
