//! Hot kernels on the default thread pool versus a single worker.
//!
//! `cargo bench -p grfgp-core` compares pools inside one build. Add
//! `--no-default-features` to time the plain-loop fallback instead; the
//! "pool" rows then run sequentially too.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use grfgp::exec::with_threads;
use grfgp::gp::{Dataset, GpModel};
use grfgp::graph::{generate, GeneratorKind, Graph, WalkMatrix};
use grfgp::grf::{sample_features, LoadRule, Modulation, WalkCache, WalkConfig};
use grfgp::solvers::{cg_solve, CgSettings, KernelOperator};

const SIZES: [usize; 2] = [4_096, 32_768];

fn ring(n: usize) -> Graph {
    generate(&GeneratorKind::Ring { nodes: n, k: 4, frequency: 2 }, 0).unwrap().graph
}

fn modulation() -> Modulation {
    Modulation::diffusion_shape(1.0, 1.0, 4).unwrap()
}

fn pools() -> [(&'static str, usize); 2] {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    [("pool", all), ("single", 1)]
}

fn features(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_features");
    group.sample_size(10);
    for n in SIZES {
        let g = ring(n);
        let w = WalkMatrix::normalized_adjacency(&g).unwrap();
        let cfg = WalkConfig::new(64, 0.1, 4, 1).unwrap();
        let m = modulation();
        for (label, threads) in pools() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| with_threads(threads, || black_box(sample_features(&g, &w, &m, &cfg).unwrap())))
            });
        }
    }
    group.finish();
}

fn operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_cg_solve");
    group.sample_size(10);
    for n in SIZES {
        let g = ring(n);
        let w = WalkMatrix::normalized_adjacency(&g).unwrap();
        let phi = sample_features(&g, &w, &modulation(), &WalkConfig::new(64, 0.1, 4, 2).unwrap()).unwrap();
        let op = KernelOperator::new(&phi, 0.1);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
        let settings = CgSettings::with_tol(1e-6);
        for (label, threads) in pools() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| with_threads(threads, || black_box(cg_solve(&op, &rhs, &settings).unwrap())))
            });
        }
    }
    group.finish();
}

fn posterior_sample(c: &mut Criterion) {
    let mut group = c.benchmark_group("posterior_sample");
    group.sample_size(10);
    for n in SIZES {
        let g = ring(n);
        let w = WalkMatrix::normalized_adjacency(&g).unwrap();
        let cfg = WalkConfig::new(64, 0.1, 4, 3).unwrap();
        let cache = Arc::new(WalkCache::sample(&g, &w, &cfg, LoadRule::ImportanceWeighted).unwrap());
        let model = GpModel::new(cache, modulation(), 0.1).unwrap();
        let nodes: Vec<usize> = (0..n).step_by(4).collect();
        let y: Vec<f64> = nodes.iter().map(|&i| (i as f64 * 0.01).cos()).collect();
        let data = Dataset::new(nodes, y, n).unwrap();
        for (label, threads) in pools() {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| {
                    with_threads(threads, || {
                        let mut post = model.condition(&data).unwrap();
                        black_box(post.sample(7).unwrap())
                    })
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, features, operator, posterior_sample);
criterion_main!(benches);
