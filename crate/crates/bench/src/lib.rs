//! Seeded fixtures shared by the benchmarks.

use bjlab_core::block_jacobi::enforce_ubc;
use bjlab_core::linalg::random::{random_orthogonal, random_symmetric};
use bjlab_core::{BlockIndex, ElementaryBlockMatrix, Matrix, Partition, PivotSequence, SymmetricMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for benchmark inputs.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random symmetric matrix of the partition's order.
pub fn symmetric_input(p: &Partition, seed: u64) -> SymmetricMatrix {
    random_symmetric(p.n(), &mut rng(seed))
}

/// One Haar-random pivot factor per step of `o`, permuted to satisfy UBC
/// with slack `rho`.
pub fn ubc_factors(p: &Partition, o: &PivotSequence, rho: f64, seed: u64) -> Vec<Matrix> {
    let mut rng = rng(seed);
    o.pairs()
        .iter()
        .map(|&(i, j)| {
            let hat = random_orthogonal(p.size(i) + p.size(j), &mut rng);
            let u = ElementaryBlockMatrix::new(p.clone(), BlockIndex { i, j }, hat).expect("valid pivot");
            enforce_ubc(&u, rho).expect("UBC permutation").factor.hat_u().clone()
        })
        .collect()
}
