use bjlab_core::jjacobi::{check_assumptions, jjacobi_kernel, pencil_oracle, FactorKind};
use bjlab_core::linalg::random::random_spd;
use bjlab_core::linalg::{jacobi_eigensolve, EigenOrdering};
use bjlab_core::{
    jjacobi_solve, solve, JJacobiError, JSignature, Matrix, Partition, PivotSequence, SolverConfig, SymmetricMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn part(sizes: &[usize]) -> Partition {
    Partition::new(sizes.to_vec()).unwrap()
}

/// Pencil eigenvalues through a Cholesky factor: with `A = LLᵀ`, the pencil
/// `Ax = λJx` has the eigenvalues of the symmetric `LᵀJL` (similar to `JA`).
fn pencil_by_cholesky(a: &SymmetricMatrix, sig: &JSignature) -> Vec<f64> {
    let n = a.n();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a.get(j, j) - (0..j).map(|k| l.get(j, k).powi(2)).sum::<f64>();
        l.set(j, j, d.sqrt());
        for i in j + 1..n {
            let s = a.get(i, j) - (0..j).map(|k| l.get(i, k) * l.get(j, k)).sum::<f64>();
            l.set(i, j, s / l.get(j, j));
        }
    }
    let m = l.transpose().matmul(&sig.to_matrix()).matmul(&l);
    jacobi_eigensolve(&SymmetricMatrix::symmetrized(&m), 1e-15, EigenOrdering::Nonincreasing, 60).unwrap().eigenvalues
}

fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
}

#[test]
fn hyperbolic_kernel_on_two_by_two() {
    let a = SymmetricMatrix::from_lower_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
    let out = jjacobi_kernel(&a, &[1.0, -1.0], 1e-14).unwrap();
    let theta = 0.5f64.atanh() / 2.0;
    assert!((out.hat_f.get(0, 0) - theta.cosh()).abs() < 1e-14);
    let sqrt3 = 3f64.sqrt();
    assert!((out.diagonal[0] - sqrt3).abs() < 1e-14);
    assert!((out.diagonal[1] - sqrt3).abs() < 1e-14);
    let sig = JSignature::new(2, 1).unwrap();
    let pencil = pencil_by_cholesky(&a, &sig);
    assert!((pencil[0] - sqrt3).abs() < 1e-14 && (pencil[1] + sqrt3).abs() < 1e-14);
}

#[test]
fn four_by_four_pencil_matches_both_oracles() {
    let a = random_spd(4, &mut rng(9));
    let sig = JSignature::new(4, 2).unwrap();
    let cfg = SolverConfig::new(part(&[2, 2]), PivotSequence::row(2));
    let r = jjacobi_solve(&a, sig, &cfg).unwrap();
    assert!(r.converged);
    let chol = pencil_by_cholesky(&a, &sig);
    assert!(rel_gap(&r.pencil_eigenvalues, &chol) < 1e-8);
    assert!(rel_gap(&pencil_oracle(&a, &sig).unwrap(), &chol) < 1e-10);
    assert!(r.j_defect < 1e-9);
    assert!(a.congruence(&r.transform).max_abs_diff(&r.matrix) < 1e-8);
    assert_eq!(r.pencil_eigenvalues.iter().filter(|&&x| x > 0.0).count(), 2);
}

#[test]
fn process_ratios_vanish_at_termination() {
    let a = random_spd(6, &mut rng(10));
    let sig = JSignature::new(6, 3).unwrap();
    let cfg = SolverConfig::new(part(&[2, 1, 1, 2]), PivotSequence::column(4));
    let r = jjacobi_solve(&a, sig, &cfg).unwrap();
    let report = check_assumptions(&r.diagnostics);
    let last = report.sweeps.last().expect("at least one sweep");
    assert!(last.max_pivot_ratio < 1e-8);
    assert!(last.final_off_ratio < 1e-8);
    assert!(report.hyperbolic_sigma_ok);
    assert!(!report.growth_flagged);
    assert!(r.diagnostics.steps.iter().any(|s| s.kind == FactorKind::Hyperbolic));
}

#[test]
fn full_positive_signature_reduces_to_the_orthogonal_method() {
    let a = random_spd(5, &mut rng(11));
    let sig = JSignature::new(5, 5).unwrap();
    let cfg = SolverConfig::new(part(&[2, 1, 2]), PivotSequence::row(3));
    let r = jjacobi_solve(&a, sig, &cfg).unwrap();
    assert!(r.diagnostics.steps.iter().all(|s| s.kind == FactorKind::Orthogonal && s.orthogonality_deviation < 1e-12));
    let o = solve(&a, &cfg).unwrap();
    let mut ev = o.eigenvalues.clone();
    ev.sort_by(|x, y| y.total_cmp(x));
    assert!(rel_gap(&r.pencil_eigenvalues, &ev) < 1e-10);
}

#[test]
fn near_identity_factors_are_nearly_orthogonal() {
    let n = 6;
    let a =
        SymmetricMatrix::from_lower_fn(n, |i, j| if i == j { 1.0 + i as f64 } else { 1e-12 * (1.0 + (i * j) as f64) });
    let sig = JSignature::new(n, 2).unwrap();
    let cfg = SolverConfig::new(part(&[1, 1, 2, 2]), PivotSequence::column(4));
    let r = jjacobi_solve(&a, sig, &cfg).unwrap();
    assert!(r.diagnostics.steps.iter().all(|s| s.orthogonality_deviation < 1e-10));
}

#[test]
fn rejects_indefinite_and_incompatible_input() {
    let sig = JSignature::new(3, 1).unwrap();
    let cfg = SolverConfig::new(part(&[1, 1, 1]), PivotSequence::row(3));
    let indefinite = SymmetricMatrix::from_diagonal(&[1.0, -2.0, 3.0]);
    assert!(matches!(jjacobi_solve(&indefinite, sig, &cfg), Err(JJacobiError::NotPositiveDefinite { .. })));
    let coarse = SolverConfig::new(part(&[2, 1]), PivotSequence::row(2));
    assert!(matches!(
        jjacobi_solve(&SymmetricMatrix::identity(3), sig, &coarse),
        Err(JJacobiError::PartitionIncompatible { .. })
    ));
    assert!(JSignature::new(3, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pencil_eigenvalues_match_cholesky_oracle(seed in 0u64..1000, nu in 1usize..5) {
        let n = 5;
        let a = random_spd(n, &mut rng(seed));
        let sig = JSignature::new(n, nu).unwrap();
        let mut sizes = vec![1; n];
        if nu >= 2 {
            sizes = vec![nu];
            sizes.extend(std::iter::repeat_n(1, n - nu));
        }
        let p = Partition::new(sizes).unwrap();
        let cfg = SolverConfig::new(p.clone(), PivotSequence::column(p.m()));
        let r = jjacobi_solve(&a, sig, &cfg).unwrap();
        prop_assert!(rel_gap(&r.pencil_eigenvalues, &pencil_by_cholesky(&a, &sig)) < 1e-8);
        prop_assert!(r.j_defect < 1e-9);
        prop_assert_eq!(r.pencil_eigenvalues.iter().filter(|&&x| x > 0.0).count(), nu);
    }
}
