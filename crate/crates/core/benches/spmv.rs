use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use napspmv::{
    comm::{build_standard_pattern, NodeAwarePattern},
    sim::{run_napspmv, run_standard_spmv, Schedule},
    sparse::{generate_random, Partition},
    Topology,
};
use std::hint::black_box;

const SCHEDULES: [(&str, Schedule); 2] = [
    ("sequential", Schedule::Sequential),
    ("parallel", Schedule::Parallel),
];

fn spmv(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmv");
    group.sample_size(10);
    for (nodes, ppn) in [(4, 4), (8, 8)] {
        let topo = Topology::new(nodes, ppn).unwrap();
        let n = 1000 * topo.num_procs();
        let a = generate_random(n, 50, 7).unwrap();
        let part = Partition::contiguous(n, &topo).unwrap();
        let v: Vec<f64> = (0..n).map(|i| (i % 13) as f64).collect();
        let tag = format!("{nodes}x{ppn}");
        for (name, schedule) in SCHEDULES {
            group.bench_with_input(BenchmarkId::new(format!("standard/{name}"), &tag), &schedule, |b, &s| {
                b.iter(|| run_standard_spmv(&a, black_box(&v), &part, &topo, s).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("node_aware/{name}"), &tag), &schedule, |b, &s| {
                b.iter(|| run_napspmv(&a, black_box(&v), &part, &topo, s).unwrap())
            });
        }
    }
    group.finish();
}

fn patterns(c: &mut Criterion) {
    let mut group = c.benchmark_group("pattern");
    group.sample_size(10);
    let topo = Topology::new(8, 8).unwrap();
    let n = 64_000;
    let a = generate_random(n, 50, 9).unwrap();
    let part = Partition::strided(n, &topo).unwrap();
    group.bench_function("standard", |b| {
        b.iter(|| build_standard_pattern(black_box(&a), &part, &topo).unwrap())
    });
    group.bench_function("node_aware", |b| {
        b.iter(|| NodeAwarePattern::build(black_box(&a), &part, &topo).unwrap())
    });
    group.finish();
}

criterion_group!(benches, spmv, patterns);
criterion_main!(benches);
