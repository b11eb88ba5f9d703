use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dydap_bench::access_graph;
use dydap_core::partitioner::{partition_exhaustive, partition_heuristic};
use dydap_core::{ConstraintMatrix, PartitionSpec};
use std::hint::black_box;

fn heuristic(c: &mut Criterion) {
    let mut group = c.benchmark_group("heuristic");
    group.sample_size(20);
    for depth in [6, 8, 10] {
        let g = access_graph(depth, 200_000);
        let cm = ConstraintMatrix::uniform(g.num_vertices());
        let spec = PartitionSpec::with_default_tolerance(8, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(1 << depth), &g, |b, g| {
            b.iter(|| partition_heuristic(black_box(g), &cm, &spec, 42).unwrap())
        });
    }
    group.finish();
}

fn exhaustive(c: &mut Criterion) {
    let g = access_graph(3, 10_000);
    let cm = ConstraintMatrix::uniform(8);
    let spec = PartitionSpec::with_default_tolerance(2, 1).unwrap();
    c.bench_function("exhaustive_8x2", |b| {
        b.iter(|| partition_exhaustive(black_box(&g), &cm, &spec).unwrap())
    });
}

criterion_group!(benches, heuristic, exhaustive);
criterion_main!(benches);
