//! Materializing the block Jacobi operator of one sweep and its spectral norm.

use bjlab_bench::ubc_factors;
use bjlab_core::annihilator::product_norm;
use bjlab_core::linalg::NORM_TOL;
use bjlab_core::{OperatorProduct, Partition, PivotSequence};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator");
    for sizes in [vec![1, 1, 1, 1], vec![2, 2, 2, 2], vec![1, 2, 3, 2, 1]] {
        let p = Partition::new(sizes).unwrap();
        let o = PivotSequence::row(p.m());
        let hats = ubc_factors(&p, &o, 1.0, 3);
        let op = OperatorProduct::new(&p, &o, &hats).unwrap();
        let label = p.to_string();
        group.bench_with_input(BenchmarkId::new("materialize", &label), &op, |bench, op| {
            bench.iter(|| op.materialize().unwrap());
        });
        group.bench_with_input(BenchmarkId::new("norm", &label), &op, |bench, op| {
            bench.iter(|| product_norm(std::slice::from_ref(op), NORM_TOL).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_operator);
criterion_main!(benches);
