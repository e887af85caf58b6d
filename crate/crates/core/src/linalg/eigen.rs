//! Element-wise cyclic Jacobi eigensolver.
//!
//! This is the kernel that diagonalizes pivot submatrices inside the block
//! method, and also the reference solver that tests compare the block method
//! against.

use serde::{Deserialize, Serialize};

use super::{off_norm, LinalgError, Matrix, SymmetricMatrix};

/// A plane rotation acting on coordinates `p < q`.
///
/// As a matrix it equals the identity except for
/// `J[p][p] = J[q][q] = c`, `J[p][q] = s`, `J[q][p] = −s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub p: usize,
    pub q: usize,
    pub c: f64,
    pub s: f64,
}

impl GivensRotation {
    /// Rotation angle `θ` with `c = cos θ`, `s = sin θ`.
    pub fn angle(&self) -> f64 {
        self.s.atan2(self.c)
    }

    /// Dense `n × n` realization.
    pub fn to_matrix(&self, n: usize) -> Matrix {
        let mut j = Matrix::identity(n);
        j.set(self.p, self.p, self.c);
        j.set(self.q, self.q, self.c);
        j.set(self.p, self.q, self.s);
        j.set(self.q, self.p, -self.s);
        j
    }
}

/// Order in which eigenvalues are reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenOrdering {
    #[default]
    Nonincreasing,
    Nondecreasing,
    Unsorted,
}

impl EigenOrdering {
    /// Stable permutation that puts `values` in this order.
    pub fn permutation(self, values: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        match self {
            EigenOrdering::Nonincreasing => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
            EigenOrdering::Nondecreasing => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
            EigenOrdering::Unsorted => {}
        }
        idx
    }

    /// `true` when `values` already respect this order.
    pub fn is_ordered(self, values: &[f64]) -> bool {
        match self {
            EigenOrdering::Nonincreasing => values.windows(2).all(|w| w[0] >= w[1]),
            EigenOrdering::Nondecreasing => values.windows(2).all(|w| w[0] <= w[1]),
            EigenOrdering::Unsorted => true,
        }
    }
}

/// Output of [`jacobi_eigensolve`].
#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Eigenvalues in the requested order.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub eigenvectors: Matrix,
    /// Ordering applied to `eigenvalues`.
    pub ordering: EigenOrdering,
    /// Number of full sweeps performed.
    pub sweeps: usize,
    /// Off-norm of `VᵀAV` at termination (before the diagonal is extracted).
    pub residual_off_norm: f64,
}

/// Computes the rotation that annihilates `a[p][q]`, or `None` if it is already zero.
///
/// Uses `τ = (a_qq − a_pp)/(2a_pq)` and `t = sign(τ)/(|τ| + √(1+τ²))`, so
/// `|t| ≤ 1` and the angle lies in `[−π/4, π/4]`.
pub fn rotation_for(a: &SymmetricMatrix, p: usize, q: usize) -> Option<GivensRotation> {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return None;
    }
    let tau = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
    let t = if tau >= 0.0 { 1.0 / (tau + tau.hypot(1.0)) } else { -1.0 / (-tau + tau.hypot(1.0)) };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    Some(GivensRotation { p, q, c, s })
}

/// Applies `A ← JᵀAJ` (and `V ← VJ` when given) for a rotation produced by
/// [`rotation_for`], setting `a[p][q]` to exactly zero.
pub fn apply_rotation(a: &mut SymmetricMatrix, v: Option<&mut Matrix>, rot: &GivensRotation) {
    let GivensRotation { p, q, c, s } = *rot;
    let apq = a.get(p, q);
    let t = s / c;
    let n = a.n();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        a.set(r, p, c * arp - s * arq);
        a.set(r, q, s * arp + c * arq);
    }
    a.set(p, p, a.get(p, p) - t * apq);
    a.set(q, q, a.get(q, q) + t * apq);
    a.set(p, q, 0.0);
    if let Some(v) = v {
        for r in 0..v.rows() {
            let vp = v.get(r, p);
            let vq = v.get(r, q);
            v.set(r, p, c * vp - s * vq);
            v.set(r, q, s * vp + c * vq);
        }
    }
}

/// Performs one row-cyclic sweep `(0,1),(0,2),…,(n−2,n−1)` and returns the
/// rotations that were applied.
pub fn row_cyclic_sweep(a: &mut SymmetricMatrix, mut v: Option<&mut Matrix>) -> Vec<GivensRotation> {
    let n = a.n();
    let mut applied = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            if let Some(rot) = rotation_for(a, p, q) {
                apply_rotation(a, v.as_deref_mut(), &rot);
                applied.push(rot);
            }
        }
    }
    applied
}

/// Diagonalizes a symmetric matrix with the row-cyclic Jacobi method.
///
/// Sweeps continue until `off_norm(VᵀAV) ≤ tol·‖A‖_F`. Eigenvalues are then
/// stably sorted per `ordering` and the columns of `V` permuted to match.
pub fn jacobi_eigensolve(
    a: &SymmetricMatrix,
    tol: f64,
    ordering: EigenOrdering,
    max_sweeps: usize,
) -> Result<EigenResult, LinalgError> {
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    let n = a.n();
    let threshold = tol * a.frobenius_norm();
    let mut work = a.clone();
    let mut v = Matrix::identity(n);
    let mut sweeps = 0;
    let mut off = off_norm(&work);
    while off > threshold {
        if sweeps == max_sweeps {
            return Err(LinalgError::NonConvergence { sweeps, off_norm: off });
        }
        row_cyclic_sweep(&mut work, Some(&mut v));
        sweeps += 1;
        off = off_norm(&work);
    }
    let diag = work.diagonal();
    let perm = ordering.permutation(&diag);
    let eigenvalues = perm.iter().map(|&k| diag[k]).collect();
    let eigenvectors = v.select_columns(&perm);
    Ok(EigenResult { eigenvalues, eigenvectors, ordering, sweeps, residual_off_norm: off })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_its_own_decomposition() {
        let r = jacobi_eigensolve(&SymmetricMatrix::identity(4), 1e-13, EigenOrdering::Nonincreasing, 10).unwrap();
        assert_eq!(r.eigenvalues, vec![1.0; 4]);
        assert_eq!(r.eigenvectors, Matrix::identity(4));
        assert_eq!(r.sweeps, 0);
    }

    #[test]
    fn two_by_two_analytic() {
        let a = SymmetricMatrix::from_lower_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let r = jacobi_eigensolve(&a, 1e-13, EigenOrdering::Nonincreasing, 10).unwrap();
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((r.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equal_diagonal_gives_quarter_turn() {
        let a = SymmetricMatrix::from_lower_fn(2, |i, j| if i == j { 1.0 } else { 0.5 });
        let rot = rotation_for(&a, 0, 1).unwrap();
        assert!((rot.angle().abs() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let a = SymmetricMatrix::identity(2);
        assert!(jacobi_eigensolve(&a, 0.0, EigenOrdering::Unsorted, 3).is_err());
    }

    #[test]
    fn reports_nonconvergence_when_capped() {
        let a = SymmetricMatrix::from_lower_fn(5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let err = jacobi_eigensolve(&a, 1e-15, EigenOrdering::Unsorted, 1).unwrap_err();
        assert!(matches!(err, LinalgError::NonConvergence { sweeps: 1, .. }));
    }
}
