//! Update and estimate costs for both sketches against the exact table.
//!
//! The equal-space claim rests on the counter matrix being cheaper per
//! update than a bank of sign sketches: two affine hash evaluations versus
//! two cubic ones. These benchmarks put numbers on that.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use corrsketch::rng::Xoshiro256PlusPlus;
use corrsketch::{CounterMatrix, ExactTable, SignSketch};
use corrsketch_bench::synthetic_pairs;

const ALPHABET: u32 = 10_000;
const BATCH: usize = 10_000;

fn bench_updates(c: &mut Criterion) {
    let pairs = synthetic_pairs(ALPHABET, BATCH, 1);
    let mut group = c.benchmark_group("update");
    group.throughput(Throughput::Elements(BATCH as u64));

    for side in [8u32, 32, 128] {
        group.bench_with_input(
            BenchmarkId::new("counter_matrix", side),
            &side,
            |b, &side| {
                let mut rng = Xoshiro256PlusPlus::new(7);
                let mut sketch = CounterMatrix::new(side, &mut rng).unwrap();
                b.iter(|| {
                    for &p in &pairs {
                        sketch.update(p).unwrap();
                    }
                    sketch.total()
                });
            },
        );
    }

    group.bench_function("sign_sketch", |b| {
        let mut rng = Xoshiro256PlusPlus::new(7);
        let mut sketch = SignSketch::new(&mut rng);
        b.iter(|| {
            for &p in &pairs {
                sketch.update(p).unwrap();
            }
            sketch.accumulators()
        });
    });

    group.bench_function("exact_table", |b| {
        let mut table = ExactTable::new(ALPHABET).unwrap();
        b.iter(|| {
            for &p in &pairs {
                table.ingest(p).unwrap();
            }
            table.total()
        });
    });

    group.finish();
}

fn bench_estimates(c: &mut Criterion) {
    let pairs = synthetic_pairs(ALPHABET, 100_000, 2);
    let mut group = c.benchmark_group("estimate");

    for side in [32u32, 256] {
        let mut rng = Xoshiro256PlusPlus::new(3);
        let mut sketch = CounterMatrix::new(side, &mut rng).unwrap();
        for &p in &pairs {
            sketch.update(p).unwrap();
        }
        group.bench_with_input(
            BenchmarkId::new("counter_matrix", side),
            &sketch,
            |b, sketch| b.iter(|| sketch.estimate().unwrap().corrected_l2sq),
        );
    }

    group.finish();
}

criterion_group!(benches, bench_updates, bench_estimates);
criterion_main!(benches);
