use bjlab_core::bounds::{
    bound_partition, eta_elementwise, eta_recursion, eta_tilde, gamma_ij, gamma_tilde, mu_for_sequence, zeta_floor,
    BoundSource,
};
use bjlab_core::orderings::{generate_member, GenerateOptions};
use bjlab_core::{BlockPermutation, ClassKind, Partition, PivotSequence};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn part(sizes: &[usize]) -> Partition {
    Partition::new(sizes.to_vec()).unwrap()
}

fn gamma_direct(ni: usize, nj: usize) -> f64 {
    3.0 / (((4f64.powi(ni as i32) + 6.0 * nj as f64 - 1.0) * (nj as f64 + 1.0)).sqrt())
}

/// The recursion in plain floating point, usable while `η` stays well below 1.
fn recursion_direct(sizes: &[usize], rho: f64) -> f64 {
    let mut eta = 0.0;
    for l in 3..=sizes.len() {
        let mut zeta = f64::INFINITY;
        for a in 0..l {
            for b in a + 1..l {
                zeta = zeta.min(gamma_direct(sizes[a], sizes[b])).min(gamma_direct(sizes[b], sizes[a]));
            }
        }
        let z = (rho * zeta).powi(2 * (l as i32 - 1));
        let g0 = 1.0 - z / 2.0;
        let g_eps = 1.0 - (1.0 - eta) * z / (z + 2.0 * (l as f64 - 2.0) * eta);
        eta = f64::max(g0, g_eps);
    }
    eta
}

fn random_partition(n: usize, rng: &mut ChaCha8Rng) -> Partition {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=left.min(4));
        sizes.push(s);
        left -= s;
    }
    if sizes.len() == 1 {
        sizes = vec![n - 1, 1];
    }
    Partition::new(sizes).unwrap()
}

#[test]
fn gamma_of_two_scalars() {
    assert!((gamma_ij(1, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((gamma_tilde(2) - 3.0 * 2f64.sqrt() / 42f64.sqrt()).abs() < 1e-15);
    // The comparison with the uniform floor is tight for (n_i, n_j) = (1, 2).
    assert!((gamma_ij(1, 2) - gamma_tilde(3)).abs() < 1e-15);
    for ni in 1..8 {
        for nj in 1..8 {
            assert!((gamma_ij(ni, nj) - gamma_direct(ni, nj)).abs() < 1e-14 * gamma_direct(ni, nj));
        }
    }
}

#[test]
fn gamma_decreases_in_both_sizes() {
    for ni in 1..12 {
        for nj in 1..12 {
            assert!(gamma_ij(ni + 1, nj) < gamma_ij(ni, nj));
            assert!(gamma_ij(ni, nj + 1) < gamma_ij(ni, nj));
            assert!(gamma_ij(ni, nj) >= gamma_tilde(ni + nj) * (1.0 - 1e-14), "({ni}, {nj})");
        }
    }
}

#[test]
fn elementwise_constants() {
    assert_eq!(eta_elementwise(2).eta(), 0.0);
    assert!((eta_elementwise(3).eta() - 0.75).abs() < 1e-15);
    assert!((eta_elementwise(4).eta() - 27.0 / 28.0).abs() < 1e-15);
    let c = eta_recursion(&Partition::ones(4).unwrap(), 1.0).unwrap();
    assert_eq!(c.source, BoundSource::Elementwise);
    assert!((c.eta.eta() - 27.0 / 28.0).abs() < 1e-15);
    let c = eta_recursion(&Partition::ones(4).unwrap(), 0.5).unwrap();
    assert_eq!(c.source, BoundSource::Recursion);
}

#[test]
fn three_scalar_blocks_give_seven_eighths() {
    let c = eta_recursion(&part(&[1, 1, 1]), 1.0).unwrap();
    assert!((c.zeta_floor_per_level[1].sharp - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!((c.eta_recursion.eta() - 0.875).abs() < 1e-15);
    assert!((c.eta.eta() - 0.75).abs() < 1e-15);
    assert!((c.mu.eta() - 0.75f64.sqrt()).abs() < 1e-15);
}

#[test]
fn recursion_matches_direct_evaluation() {
    for sizes in [vec![1, 2], vec![1, 1, 2], vec![2, 1, 1], vec![1, 2, 1, 1], vec![2, 2, 1], vec![1, 1, 1, 1, 1]] {
        for rho in [0.5, 0.8, 1.0] {
            let got = eta_recursion(&part(&sizes), rho).unwrap().eta_recursion.eta();
            let want = recursion_direct(&sizes, rho);
            assert!((got - want).abs() < 1e-13, "{sizes:?} rho {rho}: {got} vs {want}");
        }
    }
}

#[test]
fn crude_floor_never_exceeds_sharp_floor() {
    let p = part(&[2, 3, 1, 2]);
    for l in 2..=4 {
        let f = zeta_floor(&p, l, 0.7).unwrap();
        assert!(f.ln_crude() <= f.ln_sharp());
    }
    assert!(zeta_floor(&p, 1, 1.0).is_err());
    assert!(zeta_floor(&p, 5, 1.0).is_err());
    assert!(zeta_floor(&p, 2, 0.0).is_err());
    assert!(eta_tilde(5, 1.5).is_err());
}

#[test]
fn constants_are_feasible_up_to_twenty() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 2..=20 {
        for rho in [0.25, 0.5, 1.0] {
            let tilde = eta_tilde(n, rho).unwrap();
            assert!(tilde.log_margin() < 0.0 && tilde.log_margin().is_finite(), "n={n}");
            for p in [Partition::ones(n).unwrap(), random_partition(n, &mut rng)] {
                let c = eta_recursion(&p, rho).unwrap();
                assert!(c.eta.log_margin() <= 0.0 && c.eta.log_margin().is_finite(), "{p} rho {rho}");
                assert!(c.eta.eta() >= 0.0);
            }
        }
    }
}

#[test]
fn partition_constant_beats_the_uniform_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let p = random_partition(10, &mut rng);
        for rho in [0.5, 1.0] {
            let c = eta_recursion(&p, rho).unwrap();
            assert!(c.eta.log_margin() > c.eta_tilde.log_margin(), "{p} rho {rho}");
        }
    }
}

#[test]
fn sequence_bound_uses_the_witness_frame() {
    let p = part(&[3, 1, 2, 1]);
    let o = PivotSequence::column(4);
    let b = mu_for_sequence(&o, &p, 1.0, None).unwrap();
    assert_eq!(b.sweeps, 1);
    assert_eq!(b.bound_partition, vec![3, 1, 2, 1]);
    let rev = mu_for_sequence(&PivotSequence::row(4).reverse(), &p, 1.0, None).unwrap();
    assert_eq!(rev.bound_partition, vec![1, 2, 1, 3]);
    assert!((b.mu.eta() - b.eta.eta().sqrt()).abs() < 1e-15);
    assert!(mu_for_sequence(&o, &part(&[1, 1, 1]), 1.0, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witnessed_bounds_follow_the_relabeled_frame(seed in 0u64..1000, m in 3usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<usize> = (0..m).map(|_| rng.random_range(1..4)).collect();
        let p = Partition::new(sizes).unwrap();
        let member = generate_member(ClassKind::Bsg, m, GenerateOptions::default(), &mut rng).unwrap();
        let b = mu_for_sequence(&member.sequence, &p, 1.0, Some(&member.witness)).unwrap();
        let frame = bound_partition(&p, &member.witness);
        prop_assert_eq!(b.bound_partition.clone(), frame.sizes().to_vec());
        prop_assert_eq!(b.sweeps, member.witness.shifts + 1);
        let mut sorted_frame = frame.sizes().to_vec();
        let mut sorted = p.sizes().to_vec();
        sorted_frame.sort();
        sorted.sort();
        prop_assert_eq!(sorted_frame, sorted);
        let identity = BlockPermutation::identity(m);
        prop_assert_eq!(p.relabeled(&identity), p.clone());
    }
}
