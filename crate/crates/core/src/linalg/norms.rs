//! Spectral norm, extreme singular values and spectral radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{jacobi_eigensolve, EigenOrdering, LinalgError, Matrix, SymmetricMatrix};

const KERNEL_SWEEPS: usize = 60;

/// Eigenvalues of the smaller Gram matrix (`XᵀX` or `XXᵀ`), nonincreasing.
fn gram_eigenvalues(x: &Matrix, tol: f64) -> Result<Vec<f64>, LinalgError> {
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    let g = if x.rows() >= x.cols() { x.tr_matmul(x) } else { x.matmul(&x.transpose()) };
    let g = SymmetricMatrix::symmetrized(&g);
    let kernel_tol = tol.min(1e-14);
    Ok(jacobi_eigensolve(&g, kernel_tol, EigenOrdering::Nonincreasing, KERNEL_SWEEPS)?.eigenvalues)
}

/// Largest singular value `‖X‖₂`, from the Jacobi eigensolver applied to the Gram matrix.
pub fn spectral_norm(x: &Matrix, tol: f64) -> Result<f64, LinalgError> {
    let ev = gram_eigenvalues(x, tol)?;
    Ok(ev[0].max(0.0).sqrt())
}

/// Smallest singular value `σ_min(X)` over the `min(rows, cols)` singular values.
pub fn sigma_min(x: &Matrix, tol: f64) -> Result<f64, LinalgError> {
    let ev = gram_eigenvalues(x, tol)?;
    Ok(ev[ev.len() - 1].max(0.0).sqrt())
}

/// Estimates the spectral radius `max |λ|` by power iteration.
///
/// The estimate after each step is `(‖X²x‖/‖x‖)^{1/2}`, which also converges
/// when the dominant eigenvalues are `±λ`. Iteration stops when consecutive
/// estimates agree to relative accuracy `tol`. A fresh random start vector is
/// drawn when half the iteration budget is spent. For nonsymmetric input with
/// complex dominant eigenvalues the value is only an estimate.
pub fn spectral_radius(x: &Matrix, tol: f64) -> Result<f64, LinalgError> {
    if !x.is_square() {
        return Err(LinalgError::NotSquare { rows: x.rows(), cols: x.cols() });
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    const MAX_ITER: usize = 200_000;
    const CONFIRMATIONS: usize = 5;
    let n = x.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        normalized(v).map(|(v, _)| v).unwrap_or_else(|| vec![1.0 / (n as f64).sqrt(); n])
    };
    let mut v = start(&mut rng);
    let mut prev = f64::NAN;
    let mut agree = 0;
    for iter in 0..MAX_ITER {
        if iter == MAX_ITER / 2 {
            v = start(&mut rng);
            agree = 0;
        }
        let Some((w, n1)) = normalized(x.matvec(&v)) else { return Ok(0.0) };
        let Some((w2, n2)) = normalized(x.matvec(&w)) else { return Ok(0.0) };
        let est = (n1 * n2).sqrt();
        if (est - prev).abs() <= tol * est {
            agree += 1;
            if agree == CONFIRMATIONS {
                return Ok(est);
            }
        } else {
            agree = 0;
        }
        prev = est;
        v = w2;
    }
    Err(LinalgError::NonConvergence { sweeps: MAX_ITER, off_norm: prev })
}

fn normalized(mut v: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    for a in &mut v {
        *a /= norm;
    }
    Some((v, norm))
}
