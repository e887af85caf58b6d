//! The block Jacobi method `A^{(k+1)} = U_kᵀA^{(k)}U_k`.
//!
//! Each step picks a pivot pair `(i, j)` from the strategy, diagonalizes the
//! pivot submatrix `[[A_ii, A_ij], [A_ji, A_jj]]` with the element-wise
//! Jacobi kernel, optionally post-multiplies the kernel's eigenvector matrix
//! `Û` by the pivoted-QR permutation that makes it UBC, and applies the
//! embedded factor to block rows and columns `i` and `j`. The pivot
//! submatrix of the result is set exactly diagonal; the kernel tolerance is
//! far below the driver's stopping threshold.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{gamma_ij, SequenceBound};
use crate::linalg::{
    jacobi_eigensolve, off_norm, qr_column_pivoting, sigma_min, EigenOrdering, LinalgError, Matrix, SymmetricMatrix,
};
use crate::orderings::PivotSequence;
use crate::partition::{BlockIndex, ElementaryBlockMatrix, Partition, PartitionError};

/// Off-norm level, relative to `‖A‖_F`, below which `UbcMode::Adaptive`
/// stops applying UBC permutations.
pub const ADAPTIVE_UBC_THRESHOLD: f64 = 1e-2;

/// Sweep limit of the element-wise kernel on one pivot submatrix.
pub const KERNEL_MAX_SWEEPS: usize = 60;

/// Relative slack allowed in the `σ_min(U_ii) ≥ ϱγ_ij` check.
pub const UBC_SLACK: f64 = 1e-12;

/// Largest orthogonality defect accepted for the accumulated transform.
pub const ORTHOGONALITY_LIMIT: f64 = 1e-11;

/// Errors raised by the block Jacobi driver.
#[derive(Debug, Clone, Error)]
pub enum BlockJacobiError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix has order {found} but the partition needs {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sigma_min(U_ii) = {achieved:.3e} is below rho*gamma_ij = {required:.3e} after the UBC permutation")]
    UbcUnsatisfied { achieved: f64, required: f64 },
    #[error("off-norm {off_norm:.3e} still above threshold after {sweeps} sweeps")]
    SweepCapExceeded { sweeps: usize, off_norm: f64, partial: Box<BlockJacobiResult> },
    #[error("accumulated transform lost orthogonality (defect {0:.3e})")]
    LostOrthogonality(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// When the UBC permutation of the pivot factor is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UbcMode {
    /// At every step.
    #[default]
    Always,
    /// While `S(A^{(k)}) ≥ ADAPTIVE_UBC_THRESHOLD·‖A‖_F`.
    Adaptive,
    /// Never.
    Never,
}

impl UbcMode {
    /// Lowercase name used in configs and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            UbcMode::Always => "always",
            UbcMode::Adaptive => "adaptive",
            UbcMode::Never => "never",
        }
    }
}

impl fmt::Display for UbcMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UbcMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "always" => Ok(UbcMode::Always),
            "adaptive" => Ok(UbcMode::Adaptive),
            "never" => Ok(UbcMode::Never),
            other => Err(format!("unknown UBC mode {other:?} (expected always, adaptive or never)")),
        }
    }
}

/// Parameters of one block Jacobi run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub partition: Partition,
    /// The pivot sequence of one (quasi-)sweep.
    pub strategy: PivotSequence,
    pub ubc_mode: UbcMode,
    /// UBC slack `ϱ ∈ (0, 1]`.
    pub rho: f64,
    /// Order the kernel imposes on each diagonalized pivot submatrix.
    pub eig_order: EigenOrdering,
    /// Maximum number of sweeps.
    pub sweep_cap: usize,
    /// Stop once `S(A) ≤ stop_tol·‖A‖_F`.
    pub stop_tol: f64,
    /// Relative tolerance of the element-wise kernel.
    pub kernel_tol: f64,
    /// Accumulate the global orthogonal transform.
    pub accumulate: bool,
    /// Bound attached to the sweep records, if any.
    pub bound: Option<SequenceBound>,
}

impl SolverConfig {
    /// Defaults: UBC always, `ϱ = 1`, nonincreasing order, 30 sweeps,
    /// `stop_tol = 1e−12`, kernel tolerance `1e−13`, accumulation on.
    pub fn new(partition: Partition, strategy: PivotSequence) -> Self {
        Self {
            partition,
            strategy,
            ubc_mode: UbcMode::Always,
            rho: 1.0,
            eig_order: EigenOrdering::Nonincreasing,
            sweep_cap: 30,
            stop_tol: 1e-12,
            kernel_tol: 1e-13,
            accumulate: true,
            bound: None,
        }
    }

    /// Checks the invariants: the strategy covers all pairs of the partition's
    /// blocks, `stop_tol > 0`, `0 < kernel_tol ≤ stop_tol` and `0 < ϱ ≤ 1`.
    pub fn validate(&self) -> Result<(), BlockJacobiError> {
        let bad = |s: String| Err(BlockJacobiError::InvalidConfig(s));
        if self.strategy.m() != self.partition.m() {
            return bad(format!(
                "strategy acts on {} blocks but the partition has {}",
                self.strategy.m(),
                self.partition.m()
            ));
        }
        if !self.strategy.is_covering() {
            return bad("strategy does not cover every block pair".into());
        }
        if !(self.stop_tol > 0.0) {
            return bad(format!("stop_tol must be positive, got {}", self.stop_tol));
        }
        if !(self.kernel_tol > 0.0 && self.kernel_tol <= self.stop_tol.max(1e-13)) {
            return bad(format!("kernel_tol must lie in (0, stop_tol], got {}", self.kernel_tol));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        Ok(())
    }
}

/// One block step of the trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    /// Global step index `k` (0-based, preprocessing excluded).
    pub k: usize,
    /// Sweep the step belongs to (0-based).
    pub sweep: usize,
    pub i: usize,
    pub j: usize,
    /// `S(A^{(k+1)})`, the off-norm after the step.
    pub off_norm: f64,
    /// `σ_min(U_ii)` of the applied factor.
    pub sigma_min_uii: f64,
    /// Whether the UBC permutation was applied.
    pub ubc_applied: bool,
}

/// One sweep of the trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Sweep index (0-based).
    pub index: usize,
    pub off_before: f64,
    pub off_after: f64,
    /// `S²(after)/S²(before)`, defined as 0 when `S(before) = 0`.
    pub ratio: f64,
    /// Bound `η` attached to the run, if any.
    pub eta: Option<f64>,
    /// Smallest `σ_min(U_ii)` over the sweep's steps (observed `ζ`).
    pub min_sigma: f64,
}

/// Per-step and per-sweep history of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    /// `S(A^{(0)})` after preprocessing.
    pub initial_off_norm: f64,
    /// `‖A‖_F`.
    pub frobenius_norm: f64,
    pub steps: Vec<StepRecord>,
    pub sweeps: Vec<SweepRecord>,
    /// First step at which the adaptive mode stopped applying UBC permutations.
    pub ubc_switch_off_step: Option<usize>,
}

impl ConvergenceTrace {
    /// `S²` after sweep `s + d` divided by `S²` before sweep `s`, for every
    /// window of `d + 1` consecutive sweeps (0 when the start is already 0).
    pub fn window_ratios(&self, sweeps_per_window: usize) -> Vec<f64> {
        let w = sweeps_per_window.max(1);
        if self.sweeps.len() < w {
            return Vec::new();
        }
        (0..=self.sweeps.len() - w)
            .map(|s| {
                let before = self.sweeps[s].off_before;
                let after = self.sweeps[s + w - 1].off_after;
                if before == 0.0 {
                    0.0
                } else {
                    (after / before).powi(2)
                }
            })
            .collect()
    }

    /// `true` when the off-norm never increased from one step to the next,
    /// allowing a relative rounding slack.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let mut prev = self.initial_off_norm;
        for s in &self.steps {
            if s.off_norm > prev + slack * self.frobenius_norm.max(f64::MIN_POSITIVE) {
                return false;
            }
            prev = s.off_norm;
        }
        true
    }
}

/// Output of [`solve`].
#[derive(Clone, Debug)]
pub struct BlockJacobiResult {
    /// Eigenvalue approximations sorted per `eig_order` (nonincreasing when unsorted).
    pub eigenvalues: Vec<f64>,
    /// Final diagonal in position order.
    pub diagonal: Vec<f64>,
    /// Final iterate.
    pub matrix: SymmetricMatrix,
    /// Accumulated `V` with `VᵀAV = matrix`, when accumulation is on.
    pub transform: Option<Matrix>,
    pub trace: ConvergenceTrace,
    pub converged: bool,
    /// Number of sweeps executed.
    pub sweeps: usize,
}

/// Result of [`enforce_ubc`].
#[derive(Clone, Debug)]
pub struct UbcOutcome {
    /// `Û·Ĵ`.
    pub factor: ElementaryBlockMatrix,
    /// Column `c` of the new factor is column `permutation[c]` of the old one.
    pub permutation: Vec<usize>,
    /// `σ_min(U_ii)` of the new factor.
    pub sigma_min: f64,
    /// `ϱ·γ_ij`.
    pub required: f64,
}

/// Post-multiplies `Û` by the column permutation of a pivoted QR
/// factorization of `[U_ii U_ij]`, which guarantees `σ_min(U_ii) ≥ γ_ij`.
///
/// Returns `UbcUnsatisfied` if the achieved value falls below `ϱγ_ij`
/// (beyond a relative rounding slack), which would indicate a defect.
pub fn enforce_ubc(u: &ElementaryBlockMatrix, rho: f64) -> Result<UbcOutcome, BlockJacobiError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BlockJacobiError::InvalidConfig(format!("rho must lie in (0, 1], got {rho}")));
    }
    let (ni, nj) = (u.ni(), u.nj());
    let top = u.hat_u().submatrix(0, 0, ni, ni + nj);
    let qr = qr_column_pivoting(&top);
    let permuted = u.hat_u().select_columns(&qr.permutation);
    let factor = ElementaryBlockMatrix::new_unchecked_orthogonality(u.partition().clone(), u.pivot(), permuted)?;
    let sigma = sigma_min(&factor.u_ii(), 1e-14)?;
    let required = rho * gamma_ij(ni, nj);
    if sigma < required * (1.0 - UBC_SLACK) {
        return Err(BlockJacobiError::UbcUnsatisfied { achieved: sigma, required });
    }
    Ok(UbcOutcome { factor, permutation: qr.permutation, sigma_min: sigma, required })
}

/// Applies `U = E(i, j, Û)` as `UᵀAU` touching only the pivot rows and
/// columns, then overwrites the pivot submatrix with `diag(pivot_diag)`.
pub(crate) fn apply_pivot_factor(
    a: &mut SymmetricMatrix,
    v: Option<&mut Matrix>,
    idx: &[usize],
    hat_u: &Matrix,
    pivot_diag: &[f64],
) {
    let n = a.n();
    let k = idx.len();
    let mut in_pivot = vec![false; n];
    for &t in idx {
        in_pivot[t] = true;
    }
    let mut row = vec![0.0; k];
    for r in (0..n).filter(|&r| !in_pivot[r]) {
        for (a_pos, &t) in idx.iter().enumerate() {
            row[a_pos] = a.get(r, t);
        }
        for (c, &t) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for (a_pos, &x) in row.iter().enumerate() {
                acc += x * hat_u.get(a_pos, c);
            }
            a.set(r, t, acc);
        }
    }
    for (a_pos, &ta) in idx.iter().enumerate() {
        for (b_pos, &tb) in idx.iter().enumerate().take(a_pos + 1) {
            a.set(ta, tb, if a_pos == b_pos { pivot_diag[a_pos] } else { 0.0 });
        }
    }
    if let Some(v) = v {
        for r in 0..n {
            for (a_pos, &t) in idx.iter().enumerate() {
                row[a_pos] = v.get(r, t);
            }
            for (c, &t) in idx.iter().enumerate() {
                let mut acc = 0.0;
                for (a_pos, &x) in row.iter().enumerate() {
                    acc += x * hat_u.get(a_pos, c);
                }
                v.set(r, t, acc);
            }
        }
    }
}

/// What one in-place step did.
struct StepOutcome {
    factor: ElementaryBlockMatrix,
    sigma_min: f64,
    ubc_applied: bool,
}

fn step_in_place(
    a: &mut SymmetricMatrix,
    v: Option<&mut Matrix>,
    p: &Partition,
    idx: BlockIndex,
    cfg: &SolverConfig,
    ubc: bool,
) -> Result<StepOutcome, BlockJacobiError> {
    let rows = p.pivot_indices(idx);
    let sub = a.principal_submatrix(&rows);
    let eig = jacobi_eigensolve(&sub, cfg.kernel_tol, cfg.eig_order, KERNEL_MAX_SWEEPS)?;
    let mut factor = ElementaryBlockMatrix::new_unchecked_orthogonality(p.clone(), idx, eig.eigenvectors)?;
    let mut diag = eig.eigenvalues;
    let ubc_applied = ubc && idx.is_off_diagonal();
    let sigma_min_uii = if ubc_applied {
        let out = enforce_ubc(&factor, cfg.rho)?;
        diag = out.permutation.iter().map(|&c| diag[c]).collect();
        factor = out.factor;
        out.sigma_min
    } else if idx.is_off_diagonal() {
        sigma_min(&factor.u_ii(), 1e-14)?
    } else {
        1.0
    };
    apply_pivot_factor(a, v, &rows, factor.hat_u(), &diag);
    Ok(StepOutcome { factor, sigma_min: sigma_min_uii, ubc_applied })
}

fn check_dims(a: &SymmetricMatrix, p: &Partition) -> Result<(), BlockJacobiError> {
    if a.n() != p.n() {
        return Err(BlockJacobiError::DimensionMismatch { expected: p.n(), found: a.n() });
    }
    Ok(())
}

/// Diagonalizes every diagonal block with the kernel (pivots `(1,1), …, (m,m)`).
///
/// Returns `A^{(0)}` and the accumulated orthogonal factor.
pub fn preprocess_diagonal_blocks(
    a: &SymmetricMatrix,
    cfg: &SolverConfig,
) -> Result<(SymmetricMatrix, Matrix), BlockJacobiError> {
    let p = &cfg.partition;
    check_dims(a, p)?;
    let mut work = a.clone();
    let mut v = Matrix::identity(p.n());
    for i in 1..=p.m() {
        if p.size(i) > 1 {
            step_in_place(&mut work, Some(&mut v), p, BlockIndex { i, j: i }, cfg, false)?;
        }
    }
    Ok((work, v))
}

/// One block step on a copy of `a`; returns the new matrix and the applied factor.
///
/// The UBC permutation is applied unless `cfg.ubc_mode` is `Never`.
pub fn block_jacobi_step(
    a: &SymmetricMatrix,
    idx: BlockIndex,
    cfg: &SolverConfig,
) -> Result<(SymmetricMatrix, ElementaryBlockMatrix), BlockJacobiError> {
    check_dims(a, &cfg.partition)?;
    if idx.j > cfg.partition.m() || idx.i >= idx.j {
        return Err(PartitionError::InvalidBlockIndex { i: idx.i, j: idx.j, m: cfg.partition.m() }.into());
    }
    let mut work = a.clone();
    let out = step_in_place(&mut work, None, &cfg.partition, idx, cfg, cfg.ubc_mode != UbcMode::Never)?;
    Ok((work, out.factor))
}

/// Mutable state of a run: the iterate, the transform and the trace.
struct Run<'c> {
    cfg: &'c SolverConfig,
    a: SymmetricMatrix,
    v: Option<Matrix>,
    trace: ConvergenceTrace,
    k: usize,
}

impl<'c> Run<'c> {
    fn new(a: SymmetricMatrix, v: Option<Matrix>, cfg: &'c SolverConfig) -> Self {
        let trace = ConvergenceTrace {
            initial_off_norm: off_norm(&a),
            frobenius_norm: a.frobenius_norm(),
            ..Default::default()
        };
        Self { cfg, a, v, trace, k: 0 }
    }

    fn ubc_now(&mut self, off: f64) -> bool {
        match self.cfg.ubc_mode {
            UbcMode::Always => true,
            UbcMode::Never => false,
            UbcMode::Adaptive => {
                let on = off >= ADAPTIVE_UBC_THRESHOLD * self.trace.frobenius_norm;
                if !on && self.trace.ubc_switch_off_step.is_none() {
                    self.trace.ubc_switch_off_step = Some(self.k);
                }
                on
            }
        }
    }

    fn sweep(&mut self) -> Result<SweepRecord, BlockJacobiError> {
        let index = self.trace.sweeps.len();
        let off_before = off_norm(&self.a);
        let mut off = off_before;
        let mut min_sigma = f64::INFINITY;
        for &(i, j) in self.cfg.strategy.pairs() {
            let ubc = self.ubc_now(off);
            let out =
                step_in_place(&mut self.a, self.v.as_mut(), &self.cfg.partition, BlockIndex { i, j }, self.cfg, ubc)?;
            off = off_norm(&self.a);
            min_sigma = min_sigma.min(out.sigma_min);
            self.trace.steps.push(StepRecord {
                k: self.k,
                sweep: index,
                i,
                j,
                off_norm: off,
                sigma_min_uii: out.sigma_min,
                ubc_applied: out.ubc_applied,
            });
            self.k += 1;
        }
        let ratio = if off_before == 0.0 { 0.0 } else { (off / off_before).powi(2) };
        let record = SweepRecord {
            index,
            off_before,
            off_after: off,
            ratio,
            eta: self.cfg.bound.as_ref().map(|b| b.eta.eta()),
            min_sigma,
        };
        self.trace.sweeps.push(record.clone());
        Ok(record)
    }
}

/// Applies the `T` steps of `cfg.strategy` once, without preprocessing.
pub fn run_sweep(a: &SymmetricMatrix, cfg: &SolverConfig) -> Result<(SymmetricMatrix, SweepRecord), BlockJacobiError> {
    cfg.validate()?;
    check_dims(a, &cfg.partition)?;
    let mut run = Run::new(a.clone(), None, cfg);
    let record = run.sweep()?;
    Ok((run.a, record))
}

/// Applies `sweeps` consecutive sweeps, returning the iterate and the trace.
pub fn run_sweeps(
    a: &SymmetricMatrix,
    cfg: &SolverConfig,
    sweeps: usize,
) -> Result<(SymmetricMatrix, ConvergenceTrace), BlockJacobiError> {
    cfg.validate()?;
    check_dims(a, &cfg.partition)?;
    let mut run = Run::new(a.clone(), None, cfg);
    for _ in 0..sweeps {
        run.sweep()?;
    }
    Ok((run.a, run.trace))
}

/// Runs the block Jacobi method until `S(A) ≤ stop_tol·‖A‖_F`.
///
/// The diagonal blocks are preprocessed first. On reaching `sweep_cap` the
/// error carries the partial result.
pub fn solve(a: &SymmetricMatrix, cfg: &SolverConfig) -> Result<BlockJacobiResult, BlockJacobiError> {
    cfg.validate()?;
    check_dims(a, &cfg.partition)?;
    let (a0, v0) = preprocess_diagonal_blocks(a, cfg)?;
    let mut run = Run::new(a0, cfg.accumulate.then_some(v0), cfg);
    let threshold = cfg.stop_tol * run.trace.frobenius_norm;
    let mut off = run.trace.initial_off_norm;
    while off > threshold && run.trace.sweeps.len() < cfg.sweep_cap {
        off = run.sweep()?.off_after;
    }
    let converged = off <= threshold;
    let diagonal = run.a.diagonal();
    let order = match cfg.eig_order {
        EigenOrdering::Unsorted => EigenOrdering::Nonincreasing,
        o => o,
    };
    let eigenvalues = order.permutation(&diagonal).into_iter().map(|t| diagonal[t]).collect();
    if let Some(v) = &run.v {
        let defect = v.orthogonality_defect();
        if defect > ORTHOGONALITY_LIMIT {
            return Err(BlockJacobiError::LostOrthogonality(defect));
        }
    }
    let sweeps = run.trace.sweeps.len();
    let result = BlockJacobiResult {
        eigenvalues,
        diagonal,
        matrix: run.a,
        transform: run.v,
        trace: run.trace,
        converged,
        sweeps,
    };
    if converged {
        Ok(result)
    } else {
        Err(BlockJacobiError::SweepCapExceeded { sweeps, off_norm: off, partial: Box::new(result) })
    }
}
