//! Symmetric matrices in packed lower-triangular storage.

use super::{LinalgError, Matrix};

/// A real symmetric matrix.
///
/// Only the lower triangle is stored, so `a[s][t]` and `a[t][s]` are the same
/// memory cell and symmetry holds exactly after any sequence of updates.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymmetricMatrix {
    /// The zero matrix of order `n`.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be positive");
        Self { n, data: vec![0.0; n * (n + 1) / 2] }
    }

    /// The identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n);
        for i in 0..n {
            a.set(i, i, 1.0);
        }
        a
    }

    /// The diagonal matrix with the given diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut a = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            a.set(i, i, d);
        }
        a
    }

    /// Builds a matrix from a function evaluated on the lower triangle (`i ≥ j`).
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                a.data[packed_index(i, j)] = f(i, j);
            }
        }
        a
    }

    /// Converts a dense matrix, requiring `|x_st − x_ts| ≤ tol` for all entries.
    ///
    /// The stored value of each off-diagonal pair is the mean of the two entries.
    pub fn from_dense(x: &Matrix, tol: f64) -> Result<Self, LinalgError> {
        if !x.is_square() {
            return Err(LinalgError::NotSquare { rows: x.rows(), cols: x.cols() });
        }
        let n = x.rows();
        for i in 0..n {
            for j in 0..i {
                let gap = (x.get(i, j) - x.get(j, i)).abs();
                if gap > tol {
                    return Err(LinalgError::NotSymmetric { row: i, col: j, gap });
                }
            }
        }
        Ok(Self::from_lower_fn(n, |i, j| if i == j { x.get(i, i) } else { 0.5 * (x.get(i, j) + x.get(j, i)) }))
    }

    /// Symmetrizes a square dense matrix as `(X + Xᵀ)/2`.
    pub fn symmetrized(x: &Matrix) -> Self {
        assert!(x.is_square(), "symmetrization needs a square matrix");
        Self::from_lower_fn(x.rows(), |i, j| 0.5 * (x.get(i, j) + x.get(j, i)))
    }

    /// Matrix order.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed_index(i, j)]
    }

    /// Sets entries `(i, j)` and `(j, i)` together.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[packed_index(i, j)] = value;
    }

    /// The main diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Expands to dense storage.
    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                sum += 2.0 * self.get(i, j).powi(2);
            }
            sum += self.get(i, i).powi(2);
        }
        sum.sqrt()
    }

    /// `true` when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == 0.0))
    }

    /// The principal submatrix on the listed indices, in order.
    pub fn principal_submatrix(&self, idx: &[usize]) -> SymmetricMatrix {
        SymmetricMatrix::from_lower_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// The congruence `Uᵀ·A·U` for a square `U` of matching order.
    pub fn congruence(&self, u: &Matrix) -> SymmetricMatrix {
        assert_eq!(u.rows(), self.n, "congruence factor has the wrong order");
        let au = self.to_dense().matmul(u);
        let b = u.tr_matmul(&au);
        SymmetricMatrix::symmetrized(&b)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.n, other.n, "orders differ");
        self.data.iter().zip(&other.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// The off-norm `S(A)`: square root of the sum of squares of the strictly
/// upper-triangular entries, i.e. `(√2/2)·‖A − diag(A)‖_F`.
pub fn off_norm(a: &SymmetricMatrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.n() {
        for j in 0..i {
            sum += a.get(i, j).powi(2);
        }
    }
    sum.sqrt()
}
