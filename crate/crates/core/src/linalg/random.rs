//! Seeded random test matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Matrix, SymmetricMatrix};

/// Symmetric matrix with independent entries uniform on `[−1, 1]` in the
/// lower triangle, mirrored to the upper triangle.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymmetricMatrix {
    SymmetricMatrix::from_lower_fn(n, |_, _| rng.random_range(-1.0..=1.0))
}

/// Haar-distributed orthogonal matrix: Gram–Schmidt (applied twice) on a
/// Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    loop {
        let g = Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        if let Some(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

/// Symmetric positive definite `QᵀDQ` with `Q` Haar orthogonal and the
/// diagonal of `D` log-uniform on `[1e−3, 1]`.
pub fn random_spd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymmetricMatrix {
    let q = random_orthogonal(n, rng);
    let d: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-3.0..=0.0))).collect();
    SymmetricMatrix::from_diagonal(&d).congruence(&q)
}

/// Orthonormalizes the columns of a square matrix, or `None` if they are
/// numerically dependent.
fn orthonormalize_columns(g: &Matrix) -> Option<Matrix> {
    let n = g.cols();
    let mut q = g.clone();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..q.rows()).map(|i| q.get(i, k) * q.get(i, j)).sum();
                for i in 0..q.rows() {
                    q.set(i, j, q.get(i, j) - dot * q.get(i, k));
                }
            }
        }
        let norm = (0..q.rows()).map(|i| q.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for i in 0..q.rows() {
            q.set(i, j, q.get(i, j) / norm);
        }
    }
    Some(q)
}
