//! The full block J-Jacobi method for the pencil `(A, J)`.
//!
//! `A` is symmetric positive definite and `J = diag(I_ν, −I_{n−ν})`. Each
//! step diagonalizes the pivot submatrix by a J-orthogonal congruence
//! `F̂ᵀÂF̂` with `F̂ᵀĴF̂ = Ĵ`. Inside the pivot the kernel runs element-wise
//! sweeps: pairs of equal sign use trigonometric rotations and pairs of
//! opposite sign use hyperbolic rotations
//! `[[cosh θ, −sinh θ], [−sinh θ, cosh θ]]` with
//! `tanh 2θ = 2a_pq/(a_pp + a_qq)`. When `Λ = FᵀAF` is diagonal and
//! `FᵀJF = J`, the pencil eigenvalues are `J_tt·Λ_tt`.

use serde::Serialize;
use thiserror::Error;

use crate::block_jacobi::{
    apply_pivot_factor, enforce_ubc, BlockJacobiError, SolverConfig, UbcMode, ADAPTIVE_UBC_THRESHOLD,
};
use crate::linalg::{
    apply_rotation, jacobi_eigensolve, off_norm, rotation_for, sigma_min, EigenOrdering, LinalgError, Matrix,
    SymmetricMatrix,
};
use crate::partition::{BlockIndex, ElementaryBlockMatrix, Partition, PartitionError};

/// Sweep limit of the element-wise J-kernel on one pivot submatrix.
pub const KERNEL_MAX_SWEEPS: usize = 60;

/// Growth of `‖A^{(k)}‖_F` beyond this multiple of `‖A‖_F` is flagged.
pub const GROWTH_FLAG: f64 = 10.0;

/// Errors raised by the J-Jacobi method.
#[derive(Debug, Clone, Error)]
pub enum JJacobiError {
    #[error("signature nu = {nu} is outside 1..={n}")]
    InvalidSignature { n: usize, nu: usize },
    #[error("partition {partition} does not refine ({nu}, n - {nu})")]
    PartitionIncompatible { partition: String, nu: usize },
    #[error("matrix is not positive definite (Cholesky pivot {index} is {value:.3e})")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("hyperbolic rotation for ({p}, {q}) needs |tanh 2θ| = {tanh:.3e} < 1")]
    HyperbolicBreakdown { p: usize, q: usize, tanh: f64 },
    #[error("J-kernel did not converge within {sweeps} sweeps (off-norm {off_norm:.3e})")]
    KernelNonConvergence { sweeps: usize, off_norm: f64 },
    #[error("off-norm ratio {off_ratio:.3e} still above threshold after {sweeps} sweeps")]
    SweepCapExceeded { sweeps: usize, off_ratio: f64, partial: Box<JJacobiResult> },
    #[error(transparent)]
    BlockJacobi(#[from] BlockJacobiError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// The signature matrix `J = diag(I_ν, −I_{n−ν})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JSignature {
    n: usize,
    nu: usize,
}

impl JSignature {
    /// Requires `1 ≤ ν ≤ n`; `ν = n` gives `J = I` and a purely orthogonal run.
    pub fn new(n: usize, nu: usize) -> Result<Self, JJacobiError> {
        if nu == 0 || nu > n {
            return Err(JJacobiError::InvalidSignature { n, nu });
        }
        Ok(Self { n, nu })
    }

    /// Order `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `+1` signs.
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// `J_tt`.
    pub fn sign(&self, t: usize) -> f64 {
        if t < self.nu {
            1.0
        } else {
            -1.0
        }
    }

    /// All signs in index order.
    pub fn signs(&self) -> Vec<f64> {
        (0..self.n).map(|t| self.sign(t)).collect()
    }

    /// `J` as a dense matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_diagonal(&self.signs())
    }

    /// Checks that `p` refines `(ν, n − ν)`.
    pub fn check_partition(&self, p: &Partition) -> Result<(), JJacobiError> {
        if p.n() != self.n || !p.has_boundary(self.nu) {
            return Err(JJacobiError::PartitionIncompatible { partition: p.to_string(), nu: self.nu });
        }
        Ok(())
    }
}

/// Whether a J-orthogonal pivot factor mixes the two signs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    /// Both pivot blocks have the same sign; `F̂` is orthogonal.
    Orthogonal,
    /// The pivot blocks have opposite signs; `F̂` is hyperbolic.
    Hyperbolic,
}

/// A J-orthogonal elementary block factor.
#[derive(Clone, Debug)]
pub struct JOrthogonalElementary {
    pub pivot: BlockIndex,
    pub hat_f: Matrix,
    pub kind: FactorKind,
}

/// Output of [`jjacobi_kernel`].
#[derive(Clone, Debug)]
pub struct KernelOutput {
    /// `F̂` with `F̂ᵀÂF̂` diagonal and `F̂ᵀĴF̂ = Ĵ`.
    pub hat_f: Matrix,
    /// Diagonal of `F̂ᵀÂF̂`.
    pub diagonal: Vec<f64>,
    /// Off-norm of `F̂ᵀÂF̂` before it is declared diagonal.
    pub residual: f64,
    /// Number of element-wise sweeps used.
    pub sweeps: usize,
}

/// Hyperbolic rotation annihilating `a[p][q]` for signs of opposite type.
///
/// Returns `(cosh θ, sinh θ)` with `tanh 2θ = 2a_pq/(a_pp + a_qq)`.
fn hyperbolic_for(a: &SymmetricMatrix, p: usize, q: usize) -> Result<Option<(f64, f64)>, JJacobiError> {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return Ok(None);
    }
    let tanh2 = 2.0 * apq / (a.get(p, p) + a.get(q, q));
    if !(tanh2.abs() < 1.0) {
        return Err(JJacobiError::HyperbolicBreakdown { p, q, tanh: tanh2 });
    }
    // tanh θ = τ/(1 + √(1 − τ²)) for τ = tanh 2θ.
    let t = tanh2 / (1.0 + ((1.0 - tanh2) * (1.0 + tanh2)).sqrt());
    let ch = 1.0 / ((1.0 - t) * (1.0 + t)).sqrt();
    Ok(Some((ch, t * ch)))
}

/// `A ← FᵀAF` and `V ← VF` for `F = [[ch, −sh], [−sh, ch]]` on `(p, q)`.
fn apply_hyperbolic(a: &mut SymmetricMatrix, v: &mut Matrix, p: usize, q: usize, ch: f64, sh: f64) {
    let (app, aqq, apq) = (a.get(p, p), a.get(q, q), a.get(p, q));
    for r in (0..a.n()).filter(|&r| r != p && r != q) {
        let (arp, arq) = (a.get(r, p), a.get(r, q));
        a.set(r, p, ch * arp - sh * arq);
        a.set(r, q, -sh * arp + ch * arq);
    }
    a.set(p, p, ch * ch * app - 2.0 * ch * sh * apq + sh * sh * aqq);
    a.set(q, q, sh * sh * app - 2.0 * ch * sh * apq + ch * ch * aqq);
    a.set(p, q, 0.0);
    for r in 0..v.rows() {
        let (vp, vq) = (v.get(r, p), v.get(r, q));
        v.set(r, p, ch * vp - sh * vq);
        v.set(r, q, -sh * vp + ch * vq);
    }
}

/// Diagonalizes a positive definite `Â` by a J-orthogonal congruence.
///
/// Runs row-cyclic element-wise sweeps until `S(F̂ᵀÂF̂) ≤ tol·‖F̂ᵀÂF̂‖_F`.
pub fn jjacobi_kernel(ahat: &SymmetricMatrix, signs: &[f64], tol: f64) -> Result<KernelOutput, JJacobiError> {
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(tol).into());
    }
    let n = ahat.n();
    if signs.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: signs.len() }.into());
    }
    let mut work = ahat.clone();
    let mut f = Matrix::identity(n);
    let mut sweeps = 0;
    let mut off = off_norm(&work);
    while off > tol * work.frobenius_norm() {
        if sweeps == KERNEL_MAX_SWEEPS {
            return Err(JJacobiError::KernelNonConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                if signs[p] == signs[q] {
                    if let Some(rot) = rotation_for(&work, p, q) {
                        apply_rotation(&mut work, Some(&mut f), &rot);
                    }
                } else if let Some((ch, sh)) = hyperbolic_for(&work, p, q)? {
                    apply_hyperbolic(&mut work, &mut f, p, q, ch, sh);
                }
            }
        }
        sweeps += 1;
        off = off_norm(&work);
    }
    Ok(KernelOutput { hat_f: f, diagonal: work.diagonal(), residual: off, sweeps })
}

/// One J-Jacobi step of the diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JStepRecord {
    pub k: usize,
    pub sweep: usize,
    pub i: usize,
    pub j: usize,
    pub kind: FactorKind,
    /// `S(Â_ij^{(k+1)})/‖A^{(k)}‖_F`: the kernel residual on the pivot.
    pub pivot_ratio: f64,
    /// `S(A^{(k+1)})/‖A^{(k+1)}‖_F`.
    pub off_ratio: f64,
    /// `√Σ(σ_t(F̂) − 1)²`, the distance of `F̂` from its nearest orthogonal factor.
    pub orthogonality_deviation: f64,
    /// `σ_min(F_ii)`.
    pub sigma_min_fii: f64,
    /// `‖A^{(k+1)}‖_F`.
    pub frobenius_norm: f64,
    pub ubc_applied: bool,
}

/// Diagnostics of a J-Jacobi run for the assumptions on the process.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProcessDiagnostics {
    /// `‖A‖_F` of the input.
    pub initial_frobenius: f64,
    /// `S(A^{(0)})/‖A^{(0)}‖_F` after preprocessing.
    pub initial_off_ratio: f64,
    pub steps: Vec<JStepRecord>,
    /// Set when `‖A^{(k)}‖_F` exceeded `GROWTH_FLAG·‖A‖_F`.
    pub growth_flagged: bool,
}

/// Per-sweep summary of [`ProcessDiagnostics`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAssumptions {
    pub sweep: usize,
    /// Smallest `σ_min(F_ii)` in the sweep (the empirical floor of `σ^{[t]}`).
    pub min_sigma: f64,
    /// Smallest `σ_min(F_ii)` over the sweep's hyperbolic steps.
    pub min_sigma_hyperbolic: Option<f64>,
    /// Largest deviation of `F̂` from orthogonality in the sweep.
    pub max_deviation: f64,
    /// Largest pivot residual ratio in the sweep.
    pub max_pivot_ratio: f64,
    /// Off-norm ratio at the end of the sweep.
    pub final_off_ratio: f64,
}

/// Report of [`check_assumptions`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub sweeps: Vec<SweepAssumptions>,
    /// Every hyperbolic step had `σ_min(F_ii) ≥ 1` (up to rounding).
    pub hyperbolic_sigma_ok: bool,
    pub growth_flagged: bool,
}

/// Summarizes the trace per sweep.
pub fn check_assumptions(diag: &ProcessDiagnostics) -> AssumptionReport {
    let sweep_count = diag.steps.last().map_or(0, |s| s.sweep + 1);
    let mut sweeps = Vec::with_capacity(sweep_count);
    for t in 0..sweep_count {
        let steps: Vec<&JStepRecord> = diag.steps.iter().filter(|s| s.sweep == t).collect();
        let hyper: Vec<f64> =
            steps.iter().filter(|s| s.kind == FactorKind::Hyperbolic).map(|s| s.sigma_min_fii).collect();
        sweeps.push(SweepAssumptions {
            sweep: t,
            min_sigma: steps.iter().map(|s| s.sigma_min_fii).fold(f64::INFINITY, f64::min),
            min_sigma_hyperbolic: hyper.iter().copied().reduce(f64::min),
            max_deviation: steps.iter().map(|s| s.orthogonality_deviation).fold(0.0, f64::max),
            max_pivot_ratio: steps.iter().map(|s| s.pivot_ratio).fold(0.0, f64::max),
            final_off_ratio: steps.last().map_or(0.0, |s| s.off_ratio),
        });
    }
    let hyperbolic_sigma_ok =
        diag.steps.iter().filter(|s| s.kind == FactorKind::Hyperbolic).all(|s| s.sigma_min_fii >= 1.0 - 1e-12);
    AssumptionReport { sweeps, hyperbolic_sigma_ok, growth_flagged: diag.growth_flagged }
}

/// Output of [`jjacobi_solve`].
#[derive(Clone, Debug)]
pub struct JJacobiResult {
    /// Final iterate `Λ = FᵀAF`.
    pub matrix: SymmetricMatrix,
    /// Diagonal of `Λ`.
    pub diagonal: Vec<f64>,
    /// `J_tt·Λ_tt`, sorted nonincreasing.
    pub pencil_eigenvalues: Vec<f64>,
    /// Accumulated `F`.
    pub transform: Matrix,
    /// `max |FᵀJF − J|`.
    pub j_defect: f64,
    pub diagnostics: ProcessDiagnostics,
    pub converged: bool,
    pub sweeps: usize,
}

/// Checks positive definiteness with a Cholesky factorization.
pub fn check_positive_definite(a: &SymmetricMatrix) -> Result<(), JJacobiError> {
    let n = a.n();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) {
            return Err(JJacobiError::NotPositiveDefinite { index: j, value: d });
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(())
}

/// Eigenvalues of `A^{1/2}JA^{1/2}` (equal to those of the pencil
/// `Ax = λJx`), sorted nonincreasing. Used as an oracle.
pub fn pencil_oracle(a: &SymmetricMatrix, sig: &JSignature) -> Result<Vec<f64>, JJacobiError> {
    check_positive_definite(a)?;
    let eig = jacobi_eigensolve(a, 1e-15, EigenOrdering::Unsorted, 100)?;
    let q = eig.eigenvectors;
    let sqrt_diag: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let root = q.matmul(&Matrix::from_diagonal(&sqrt_diag)).matmul(&q.transpose());
    let m = root.matmul(&sig.to_matrix()).matmul(&root);
    let sym = SymmetricMatrix::symmetrized(&m);
    Ok(jacobi_eigensolve(&sym, 1e-15, EigenOrdering::Nonincreasing, 100)?.eigenvalues)
}

fn orthogonality_deviation(f: &Matrix) -> Result<f64, JJacobiError> {
    let g = SymmetricMatrix::symmetrized(&f.tr_matmul(f));
    let ev = jacobi_eigensolve(&g, 1e-15, EigenOrdering::Unsorted, 100)?.eigenvalues;
    Ok(ev.iter().map(|&l| (l.max(0.0).sqrt() - 1.0).powi(2)).sum::<f64>().sqrt())
}

struct JRun<'c> {
    cfg: &'c SolverConfig,
    sig: JSignature,
    a: SymmetricMatrix,
    f: Matrix,
    diag: ProcessDiagnostics,
    k: usize,
}

impl JRun<'_> {
    fn step(&mut self, idx: BlockIndex, sweep: Option<usize>) -> Result<(), JJacobiError> {
        let p = &self.cfg.partition;
        let rows = p.pivot_indices(idx);
        let signs: Vec<f64> = rows.iter().map(|&t| self.sig.sign(t)).collect();
        let norm_before = self.a.frobenius_norm();
        let sub = self.a.principal_submatrix(&rows);
        let out = jjacobi_kernel(&sub, &signs, self.cfg.kernel_tol)?;
        let kind = if signs.iter().all(|&s| s == signs[0]) { FactorKind::Orthogonal } else { FactorKind::Hyperbolic };
        let mut hat_f = out.hat_f;
        let mut diag = out.diagonal;
        let off_ratio_now = off_norm(&self.a) / norm_before;
        let ubc_wanted = match self.cfg.ubc_mode {
            UbcMode::Always => true,
            UbcMode::Adaptive => off_ratio_now >= ADAPTIVE_UBC_THRESHOLD,
            UbcMode::Never => false,
        };
        let ubc_applied = ubc_wanted && kind == FactorKind::Orthogonal && idx.is_off_diagonal();
        if ubc_applied {
            let factor = ElementaryBlockMatrix::new_unchecked_orthogonality(p.clone(), idx, hat_f)?;
            let ubc = enforce_ubc(&factor, self.cfg.rho)?;
            diag = ubc.permutation.iter().map(|&c| diag[c]).collect();
            hat_f = ubc.factor.hat_u().clone();
        }
        apply_pivot_factor(&mut self.a, Some(&mut self.f), &rows, &hat_f, &diag);
        if let Some(sweep) = sweep {
            let ni = p.size(idx.i);
            let norm_after = self.a.frobenius_norm();
            if norm_after > GROWTH_FLAG * self.diag.initial_frobenius {
                self.diag.growth_flagged = true;
            }
            self.diag.steps.push(JStepRecord {
                k: self.k,
                sweep,
                i: idx.i,
                j: idx.j,
                kind,
                pivot_ratio: out.residual / norm_before,
                off_ratio: off_norm(&self.a) / norm_after,
                orthogonality_deviation: orthogonality_deviation(&hat_f)?,
                sigma_min_fii: sigma_min(&hat_f.submatrix(0, 0, ni, ni), 1e-14)?,
                frobenius_norm: norm_after,
                ubc_applied,
            });
            self.k += 1;
        }
        Ok(())
    }
}

/// Runs the full block J-Jacobi method on the SPD matrix `a`.
///
/// Uses `cfg.partition`, `cfg.strategy`, `cfg.ubc_mode`, `cfg.rho`,
/// `cfg.sweep_cap`, `cfg.kernel_tol` and stops once
/// `S(A^{(k)}) ≤ cfg.stop_tol·‖A^{(k)}‖_F`. UBC permutations are applied to
/// orthogonal steps only; hyperbolic factors already have `σ_min(F_ii) ≥ 1`.
pub fn jjacobi_solve(a: &SymmetricMatrix, sig: JSignature, cfg: &SolverConfig) -> Result<JJacobiResult, JJacobiError> {
    cfg.validate()?;
    if a.n() != sig.n() {
        return Err(LinalgError::DimensionMismatch { expected: sig.n(), found: a.n() }.into());
    }
    sig.check_partition(&cfg.partition)?;
    check_positive_definite(a)?;
    let p = &cfg.partition;
    let mut run = JRun {
        cfg,
        sig,
        a: a.clone(),
        f: Matrix::identity(a.n()),
        diag: ProcessDiagnostics { initial_frobenius: a.frobenius_norm(), ..Default::default() },
        k: 0,
    };
    for i in 1..=p.m() {
        if p.size(i) > 1 {
            run.step(BlockIndex { i, j: i }, None)?;
        }
    }
    let ratio = |a: &SymmetricMatrix| {
        let f = a.frobenius_norm();
        if f == 0.0 {
            0.0
        } else {
            off_norm(a) / f
        }
    };
    run.diag.initial_off_ratio = ratio(&run.a);
    let mut sweeps = 0;
    while ratio(&run.a) > cfg.stop_tol && sweeps < cfg.sweep_cap {
        for &(i, j) in cfg.strategy.pairs() {
            run.step(BlockIndex { i, j }, Some(sweeps))?;
        }
        sweeps += 1;
    }
    let off_ratio = ratio(&run.a);
    let converged = off_ratio <= cfg.stop_tol;
    let diagonal = run.a.diagonal();
    let mut pencil: Vec<f64> = diagonal.iter().enumerate().map(|(t, &d)| sig.sign(t) * d).collect();
    pencil.sort_by(|x, y| y.total_cmp(x));
    let jm = sig.to_matrix();
    let j_defect = run.f.transpose().matmul(&jm).matmul(&run.f).max_abs_diff(&jm);
    let result = JJacobiResult {
        matrix: run.a,
        diagonal,
        pencil_eigenvalues: pencil,
        transform: run.f,
        j_defect,
        diagnostics: run.diag,
        converged,
        sweeps,
    };
    if converged {
        Ok(result)
    } else {
        Err(JJacobiError::SweepCapExceeded { sweeps, off_ratio, partial: Box::new(result) })
    }
}
