//! Householder QR factorization with column pivoting.

use super::Matrix;

/// Result of [`qr_column_pivoting`]: `Q·R = X·P` where column `k` of `X·P` is
/// column `permutation[k]` of `X`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    /// Column permutation chosen by the greedy rule.
    pub permutation: Vec<usize>,
    /// `|r_kk|` for `k < min(rows, cols)`, nonincreasing.
    pub r_diagonal: Vec<f64>,
    /// Orthogonal factor, `rows × rows`.
    pub q: Matrix,
    /// Upper trapezoidal factor, `rows × cols`.
    pub r: Matrix,
}

impl PivotedQr {
    /// Largest entrywise deviation of `Q·R` from `X·P`.
    pub fn residual(&self, x: &Matrix) -> f64 {
        self.q.matmul(&self.r).max_abs_diff(&x.select_columns(&self.permutation))
    }
}

/// QR factorization with Businger–Golub column pivoting.
///
/// At step `k` the remaining column with the largest residual norm is moved
/// to position `k` (the first such column wins ties). Residual norms are
/// recomputed from the partially reduced matrix instead of downdated, which
/// costs nothing at the block sizes used here and avoids cancellation.
pub fn qr_column_pivoting(x: &Matrix) -> PivotedQr {
    let (m, n) = (x.rows(), x.cols());
    let mut r = x.clone();
    let mut q = Matrix::identity(m);
    let mut permutation: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    for k in 0..steps {
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let norm: f64 = (k..m).map(|i| r.get(i, j).powi(2)).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        if best != k {
            permutation.swap(k, best);
            for i in 0..m {
                let tmp = r.get(i, k);
                r.set(i, k, r.get(i, best));
                r.set(i, best, tmp);
            }
        }
        let norm_x = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let alpha = if x0 >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|a| a * a).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                r.set(i, j, r.get(i, j) - f * v[i - k]);
            }
        }
        for i in 0..m {
            let dot: f64 = (k..m).map(|l| q.get(i, l) * v[l - k]).sum();
            let f = 2.0 * dot / vnorm2;
            for l in k..m {
                q.set(i, l, q.get(i, l) - f * v[l - k]);
            }
        }
        for i in k + 1..m {
            r.set(i, k, 0.0);
        }
    }
    let r_diagonal = (0..steps).map(|k| r.get(k, k).abs()).collect();
    PivotedQr { permutation, r_diagonal, q, r }
}
