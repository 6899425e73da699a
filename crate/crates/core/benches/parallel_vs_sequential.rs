use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fairpca::eval::{mmd2, Bandwidth, MmdOptions};
use fairpca::kernel::{gram_with, Gamma, KernelSpec};
use fairpca::{Matrix, Parallelism};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Parallel),
];

fn sample(d: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng))
}

fn bench_gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    let spec = KernelSpec::gaussian(Gamma::Fixed(0.1));
    for n in [250, 1000] {
        let x = sample(20, n, 1);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &x, |b, x| {
                b.iter(|| gram_with(&spec, black_box(x), black_box(x), mode).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_mmd(c: &mut Criterion) {
    let mut group = c.benchmark_group("mmd2");
    for n in [500, 2000] {
        let a = sample(5, n, 2);
        let b = sample(5, n, 3);
        for (name, mode) in MODES {
            let opts = MmdOptions {
                parallelism: mode,
                bandwidth: Bandwidth::Median,
                ..MmdOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &(&a, &b), |bench, (a, b)| {
                bench.iter(|| mmd2(black_box(a), black_box(b), &opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_gram, bench_mmd);
criterion_main!(benches);
