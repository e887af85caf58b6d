//! Convergence constants of the block Jacobi method.
//!
//! The one-sweep bound `S²(A′) ≤ η_{π,ϱ}·S²(A)` uses constants that sit
//! extremely close to 1 once the blocks grow (for `s_l = 50` the margin
//! `1 − η` is far below `f64` epsilon). Every constant is therefore carried
//! as a [`Contraction`], which stores `ln(1 − η)`.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::orderings::{check_witness, recognize_with_witness, ClassKind, ClassWitness, OrderingError, PivotSequence};
use crate::partition::Partition;

/// Errors raised by the bounds calculus.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("UBC slack rho must lie in (0, 1], got {0}")]
    InvalidRho(f64),
    #[error("level {l} is outside 2..={m}")]
    InvalidLevel { l: usize, m: usize },
    #[error("sequence acts on {sequence} blocks but the partition has {partition}")]
    PartitionMismatch { sequence: usize, partition: usize },
    #[error("no generalized serial witness found for the sequence")]
    NoWitness,
    #[error("the supplied witness does not match the sequence")]
    WitnessInvalid,
    #[error(transparent)]
    Ordering(#[from] OrderingError),
}

/// A contraction constant `η ∈ [0, 1)`, stored as `ln(1 − η)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contraction {
    log_margin: f64,
}

impl Contraction {
    /// `η = 0`.
    pub const ZERO: Contraction = Contraction { log_margin: 0.0 };

    /// Builds the constant from `ln(1 − η)`, which must be `≤ 0`.
    pub fn from_log_margin(log_margin: f64) -> Self {
        assert!(log_margin <= 0.0 && !log_margin.is_nan(), "log margin {log_margin} is not in (-inf, 0]");
        Self { log_margin }
    }

    /// Builds the constant from `η ∈ [0, 1)`.
    pub fn from_eta(eta: f64) -> Self {
        assert!((0.0..1.0).contains(&eta), "eta {eta} is not in [0, 1)");
        Self { log_margin: (-eta).ln_1p() }
    }

    /// `η` rounded to `f64` (may print as `1` when the margin is tiny).
    pub fn eta(self) -> f64 {
        // `0.0 - x` rather than `-x` keeps `η = 0` from printing as `-0`.
        0.0 - self.log_margin.exp_m1()
    }

    /// `1 − η`.
    pub fn margin(self) -> f64 {
        self.log_margin.exp()
    }

    /// `ln(1 − η)`.
    pub fn log_margin(self) -> f64 {
        self.log_margin
    }

    /// `√η`, using `1 − √η = (1 − η)/(1 + √η)`.
    pub fn sqrt(self) -> Contraction {
        let root = self.eta().max(0.0).sqrt();
        Contraction { log_margin: (self.log_margin - root.ln_1p()).min(0.0) }
    }

    /// The larger of two constants.
    pub fn max(self, other: Contraction) -> Contraction {
        if self.log_margin <= other.log_margin {
            self
        } else {
            other
        }
    }

    /// `true` when `value ≤ η + slack`.
    pub fn admits(self, value: f64, slack: f64) -> bool {
        value <= self.eta() + slack
    }
}

impl Serialize for Contraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Contraction", 2)?;
        st.serialize_field("eta", &self.eta())?;
        st.serialize_field("log_margin", &self.log_margin)?;
        st.end()
    }
}

impl fmt::Display for Contraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.margin() > 1e-6 {
            write!(f, "{:.12}", self.eta())
        } else {
            write!(f, "1 - {:.6e}", self.margin())
        }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// `ln(4^k + c)` for `c ≥ 0` without overflow.
fn ln_pow4_plus(k: usize, c: f64) -> f64 {
    let ln4k = k as f64 * 4f64.ln();
    ln4k + (c * (-ln4k).exp()).ln_1p()
}

/// `ln γ_ij` for block sizes `n_i`, `n_j`.
pub fn ln_gamma_ij(ni: usize, nj: usize) -> f64 {
    assert!(ni >= 1 && nj >= 1, "block sizes must be positive");
    3f64.ln() - 0.5 * (ln_pow4_plus(ni, 6.0 * nj as f64 - 1.0) + (nj as f64 + 1.0).ln())
}

/// `γ_ij = 3/√((4^{n_i} + 6n_j − 1)(n_j + 1))`, the guaranteed lower bound on
/// `σ_min(U_ii)` after the pivoted-QR permutation.
pub fn gamma_ij(ni: usize, nj: usize) -> f64 {
    ln_gamma_ij(ni, nj).exp()
}

/// `ln γ̃_n`.
pub fn ln_gamma_tilde(n: usize) -> f64 {
    (3.0 * 2f64.sqrt()).ln() - 0.5 * ln_pow4_plus(n, 26.0)
}

/// `γ̃_n = 3√2/√(4^n + 26)`, a lower bound for `γ_ij` whenever `n_i + n_j ≤ n`.
pub fn gamma_tilde(n: usize) -> f64 {
    ln_gamma_tilde(n).exp()
}

/// Lower bounds on `ζ_l`, the smallest `σ_min` of a diagonal pivot block
/// among the pairs of the leading `l` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaFloor {
    /// `ϱ·min γ` over the pairs `i < j ≤ l`, taking both orientations.
    pub sharp: f64,
    /// `3√2ϱ/√(4^{s_l} + 26)` with `s_l = n_1 + … + n_l`.
    pub crude: f64,
    ln_sharp: f64,
    ln_crude: f64,
}

impl ZetaFloor {
    /// `ln` of [`ZetaFloor::sharp`], finite even when the value underflows.
    pub fn ln_sharp(&self) -> f64 {
        self.ln_sharp
    }

    /// `ln` of [`ZetaFloor::crude`].
    pub fn ln_crude(&self) -> f64 {
        self.ln_crude
    }
}

fn check_rho(rho: f64) -> Result<(), BoundsError> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidRho(rho))
    }
}

/// Both floors for `ζ_l` on the leading `l` blocks of `p`.
///
/// The sharp floor minimizes over both `γ(n_i, n_j)` and `γ(n_j, n_i)`, so it
/// does not depend on which block of a pair plays the role of `i`.
pub fn zeta_floor(p: &Partition, l: usize, rho: f64) -> Result<ZetaFloor, BoundsError> {
    check_rho(rho)?;
    if l < 2 || l > p.m() {
        return Err(BoundsError::InvalidLevel { l, m: p.m() });
    }
    let sizes = &p.sizes()[..l];
    let mut ln_min = f64::INFINITY;
    for a in 0..l {
        for b in a + 1..l {
            ln_min = ln_min.min(ln_gamma_ij(sizes[a], sizes[b])).min(ln_gamma_ij(sizes[b], sizes[a]));
        }
    }
    let s_l: usize = sizes.iter().sum();
    let ln_sharp = rho.ln() + ln_min;
    let ln_crude = rho.ln() + ln_gamma_tilde(s_l);
    Ok(ZetaFloor { sharp: ln_sharp.exp(), crude: ln_crude.exp(), ln_sharp, ln_crude })
}

/// One step of the recursion: `η_l = max{g(0), g(ε_l)}` with `z = ζ^{2(l−1)}`,
/// `g(0) = 1 − z/2` and `g(ε_l) = 1 − (1 − η_{l−1})z/(z + 2(l−2)η_{l−1})`.
fn recursion_step(prev: Contraction, ln_zeta: f64, l: usize) -> Contraction {
    let ln_z = 2.0 * (l as f64 - 1.0) * ln_zeta;
    let g0 = Contraction::from_log_margin((ln_z - 2f64.ln()).min(0.0));
    let prev_eta = prev.eta();
    let ln_c = if prev_eta > 0.0 { (2.0 * (l as f64 - 2.0) * prev_eta).ln() } else { f64::NEG_INFINITY };
    let g_eps = Contraction::from_log_margin((prev.log_margin() + ln_z - log_add_exp(ln_z, ln_c)).min(0.0));
    g0.max(g_eps)
}

/// `η̃ = max{η′, η″}` for total size `s`, with `c = ϱγ̃_s`:
/// `η′ = 1 − c^{2(s−1)}/2` and `η″ = (s−2)/(c^{2(s−1)} + s − 2)`.
fn eta_tilde_for(s: usize, rho: f64) -> Contraction {
    if s < 2 {
        return Contraction::ZERO;
    }
    let ln_z = 2.0 * (s as f64 - 1.0) * (rho.ln() + ln_gamma_tilde(s));
    let eta_prime = Contraction::from_log_margin((ln_z - 2f64.ln()).min(0.0));
    let ln_s2 = if s > 2 { (s as f64 - 2.0).ln() } else { f64::NEG_INFINITY };
    let eta_second = Contraction::from_log_margin((ln_z - log_add_exp(ln_z, ln_s2)).min(0.0));
    eta_prime.max(eta_second)
}

/// The partition-free constant `η̃_{n,ϱ}`, valid for every partition of `n`.
pub fn eta_tilde(n: usize, rho: f64) -> Result<Contraction, BoundsError> {
    check_rho(rho)?;
    Ok(eta_tilde_for(n, rho))
}

/// The element-wise constant `η_n` for the cyclic Jacobi method with serial
/// strategies: `η_2 = 0` and
/// `η_n = max{1 − 2^{1−n}, 1 − 2^{2−n}(1 − η_{n−1})/(2^{2−n} + (n−2)η_{n−1})}`.
pub fn eta_elementwise(n: usize) -> Contraction {
    assert!(n >= 2, "the element-wise constant needs n >= 2");
    eta_elementwise_levels(n).pop().expect("at least one level")
}

/// `η_2, …, η_n`.
fn eta_elementwise_levels(n: usize) -> Vec<Contraction> {
    let ln2 = 2f64.ln();
    let mut out = vec![Contraction::ZERO];
    for k in 3..=n {
        let prev = *out.last().expect("nonempty");
        let first = Contraction::from_log_margin((1.0 - k as f64) * ln2);
        let ln_x = (2.0 - k as f64) * ln2;
        let prev_eta = prev.eta();
        let ln_c = if prev_eta > 0.0 { ((k as f64 - 2.0) * prev_eta).ln() } else { f64::NEG_INFINITY };
        let second = Contraction::from_log_margin((ln_x + prev.log_margin() - log_add_exp(ln_x, ln_c)).min(0.0));
        out.push(first.max(second));
    }
    out
}

/// Which formula produced [`BoundConstants::eta`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSource {
    /// The block recursion with the sharp `ζ` floor.
    Recursion,
    /// The element-wise constant (all blocks of size 1 and `ϱ = 1`).
    Elementwise,
}

/// All constants of the one-sweep bound for a partition and slack `ϱ`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundConstants {
    pub partition: Vec<usize>,
    pub rho: f64,
    /// `η_{π_l,ϱ}` for `l = 2, …, m`.
    pub eta_per_level: Vec<Contraction>,
    /// `η_{π,ϱ}`.
    pub eta: Contraction,
    /// The block recursion's value, kept for comparison when `eta` is element-wise.
    pub eta_recursion: Contraction,
    /// `η̃_{s_l,ϱ}` for `l = 2, …, m`.
    pub eta_tilde_per_level: Vec<Contraction>,
    /// `η̃_{n,ϱ}`.
    pub eta_tilde: Contraction,
    /// `μ_{π,ϱ} = √η_{π,ϱ}`, the operator-norm bound.
    pub mu: Contraction,
    /// Floors used for `ζ_l`, `l = 2, …, m`.
    pub zeta_floor_per_level: Vec<ZetaFloor>,
    pub source: BoundSource,
}

/// Evaluates the recursion on the prefixes `π_2, …, π_m` of `p`.
///
/// `ζ_l` is replaced by the sharp floor of [`zeta_floor`]. When every block
/// has size 1 and `ϱ = 1`, `eta` is the element-wise constant instead.
pub fn eta_recursion(p: &Partition, rho: f64) -> Result<BoundConstants, BoundsError> {
    check_rho(rho)?;
    let m = p.m();
    let mut zeta_floor_per_level = Vec::new();
    let mut rec_levels = Vec::new();
    let mut tilde_levels = Vec::new();
    if m >= 2 {
        rec_levels.push(Contraction::ZERO);
        zeta_floor_per_level.push(zeta_floor(p, 2, rho)?);
        tilde_levels.push(eta_tilde_for(p.cumulative(2), rho));
    }
    for l in 3..=m {
        let floor = zeta_floor(p, l, rho)?;
        let prev = *rec_levels.last().expect("level 2 present");
        rec_levels.push(recursion_step(prev, floor.ln_sharp, l));
        zeta_floor_per_level.push(floor);
        tilde_levels.push(eta_tilde_for(p.cumulative(l), rho));
    }
    let eta_recursion = rec_levels.last().copied().unwrap_or(Contraction::ZERO);
    let (eta_per_level, source) = if p.is_elementwise() && rho == 1.0 && m >= 2 {
        (eta_elementwise_levels(m), BoundSource::Elementwise)
    } else {
        (rec_levels, BoundSource::Recursion)
    };
    let eta = eta_per_level.last().copied().unwrap_or(Contraction::ZERO);
    Ok(BoundConstants {
        partition: p.sizes().to_vec(),
        rho,
        eta,
        eta_recursion,
        eta_tilde: eta_tilde_for(p.n(), rho),
        eta_tilde_per_level: tilde_levels,
        mu: eta.sqrt(),
        eta_per_level,
        zeta_floor_per_level,
        source,
    })
}

/// The bound that applies to a pivot sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceBound {
    /// Contraction of `S²` over `sweeps` consecutive sweeps.
    pub eta: Contraction,
    /// Bound on the norm of the product of `sweeps` block Jacobi operators.
    pub mu: Contraction,
    /// Number of consecutive sweeps the bound covers (`d + 1`).
    pub sweeps: usize,
    /// The partition the constant was computed for.
    pub bound_partition: Vec<usize>,
}

/// The frame in which a witnessed sequence becomes column-serial: the
/// partition relabeled by the witness permutation, reversed for row families.
pub fn bound_partition(p: &Partition, witness: &ClassWitness) -> Partition {
    let sigma = p.relabeled(&witness.permutation);
    if witness.base_kind.is_row() {
        sigma.reversed()
    } else {
        sigma
    }
}

/// Selects `μ` and the number of covered sweeps for `o` on partition `p`.
///
/// With a witness, the constant is computed on [`bound_partition`]. Without
/// one, the structural classes are tried first and then `B_sg` / `barB_sg`
/// by search (`m ≤ 6`).
pub fn mu_for_sequence(
    o: &PivotSequence,
    p: &Partition,
    rho: f64,
    witness: Option<&ClassWitness>,
) -> Result<SequenceBound, BoundsError> {
    check_rho(rho)?;
    if o.m() != p.m() {
        return Err(BoundsError::PartitionMismatch { sequence: o.m(), partition: p.m() });
    }
    let found;
    let w = match witness {
        Some(w) => {
            if !check_witness(o, w) {
                return Err(BoundsError::WitnessInvalid);
            }
            w
        }
        None => {
            found = find_witness(o)?.ok_or(BoundsError::NoWitness)?;
            &found
        }
    };
    let frame = bound_partition(p, w);
    let constants = eta_recursion(&frame, rho)?;
    Ok(SequenceBound {
        eta: constants.eta,
        mu: constants.mu,
        sweeps: w.sweeps_covered(),
        bound_partition: frame.sizes().to_vec(),
    })
}

fn find_witness(o: &PivotSequence) -> Result<Option<ClassWitness>, BoundsError> {
    let kinds: &[ClassKind] = if o.is_cyclic() {
        &[ClassKind::Bsp, ClassKind::Bspg, ClassKind::Bsg]
    } else {
        &[ClassKind::BarBsp, ClassKind::BarBspg, ClassKind::BarBsg]
    };
    for &kind in kinds {
        if kind.needs_search() && o.m() > crate::orderings::MAX_SEARCH_BLOCKS {
            break;
        }
        if let Some(w) = recognize_with_witness(kind, o)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_for_scalar_blocks() {
        assert!((gamma_ij(1, 1) - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((gamma_tilde(2) - 3.0 * 2f64.sqrt() / 42f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gamma_is_finite_for_huge_blocks() {
        let g = ln_gamma_ij(2000, 2000);
        assert!(g.is_finite() && g < -1000.0);
    }

    #[test]
    fn contraction_sqrt_keeps_tiny_margins() {
        let c = Contraction::from_log_margin(-80.0);
        assert_eq!(c.eta(), 1.0);
        let r = c.sqrt();
        assert!((r.log_margin() - (-80.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn elementwise_small_orders() {
        assert_eq!(eta_elementwise(2), Contraction::ZERO);
        assert!((eta_elementwise(3).eta() - 0.75).abs() < 1e-15);
        assert!((eta_elementwise(4).eta() - 27.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_for_three_scalars() {
        let p = Partition::ones(3).unwrap();
        let b = eta_recursion(&p, 1.0).unwrap();
        assert!((b.eta_recursion.eta() - 7.0 / 8.0).abs() < 1e-15);
        assert_eq!(b.source, BoundSource::Elementwise);
        assert!((b.eta.eta() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn two_blocks_give_zero() {
        let p = Partition::new(vec![3, 5]).unwrap();
        assert_eq!(eta_recursion(&p, 0.5).unwrap().eta, Contraction::ZERO);
    }

    #[test]
    fn invalid_rho_is_rejected() {
        let p = Partition::ones(3).unwrap();
        assert_eq!(eta_recursion(&p, 0.0).unwrap_err(), BoundsError::InvalidRho(0.0));
        assert!(zeta_floor(&p, 1, 1.0).is_err());
    }
}
