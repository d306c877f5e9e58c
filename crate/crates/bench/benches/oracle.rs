use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use xormmap::mmap::{xor_mmap, EstimatorConfig};
use xormmap::oracle::{solve_replicated, Engine, OracleOptions};
use xormmap_bench::{parity, replicated, two_sat};

fn elimination(c: &mut Criterion) {
    let mut group = c.benchmark_group("eliminate");
    for (dim, k) in [(16, 8), (64, 32), (256, 128)] {
        let ps = parity(dim, k, 1);
        group.bench_function(format!("{dim}x{k}"), |b| b.iter(|| ps.eliminate()));
    }
    group.finish();
}

fn replicated_engines(c: &mut Criterion) {
    let inst = two_sat(12, 5, 14, 3);
    let rep = replicated(&inst, 9, 3, 4);
    let mut group = c.benchmark_group("solve_replicated");
    for engine in [Engine::EnumerateA, Engine::JointDpll] {
        let opts = OracleOptions {
            engine,
            early_stop: false,
            ..Default::default()
        };
        group.bench_function(engine.name(), |b| {
            b.iter(|| solve_replicated(&rep, 5, &opts).expect("valid threshold"))
        });
    }
    group.finish();
}

fn full_sweep(c: &mut Criterion) {
    let inst = two_sat(10, 5, 12, 8);
    c.bench_function("xor_mmap_2sat_10_5", |b| {
        b.iter_batched(
            || EstimatorConfig {
                delta: 0.2,
                ..Default::default()
            },
            |cfg| xor_mmap(&inst, &cfg).expect("CNF instance"),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = elimination, replicated_engines, full_sweep
}
criterion_main!(benches);
