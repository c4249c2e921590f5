use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linkpred::heuristics::{batch_score, simrank, HeuristicConfig, HeuristicKind};
use linkpred::nn::Tensor;
use linkpred::par::{current_workers, with_workers};
use linkpred::rng::Rng;
use linkpred::synth::erdos_renyi;
use linkpred::NodeId;
use rand::{Rng as _, SeedableRng};

// 1 worker is the sequential baseline; 0 lets the pool pick its default.
const WORKERS: [(usize, &str); 2] = [(1, "sequential"), (0, "parallel")];

fn heuristics(c: &mut Criterion) {
    let mut rng = Rng::seed_from_u64(1);
    let g = erdos_renyi(3000, 0.005, &mut rng);
    let pairs: Vec<(NodeId, NodeId)> = (0..2_000)
        .map(|_| (rng.gen_range(0..3000), rng.gen_range(0..3000)))
        .collect();
    let kinds: Vec<_> = HeuristicKind::ALL
        .into_iter()
        .filter(|&k| k != HeuristicKind::SimRank)
        .collect();
    let cfg = HeuristicConfig::default();
    let mut group = c.benchmark_group("batch_score");
    for (w, label) in WORKERS {
        group.bench_function(BenchmarkId::new(label, pairs.len()), |b| {
            b.iter(|| with_workers(w, || batch_score(&g, &pairs, &kinds, &cfg).unwrap()))
        });
    }
    group.finish();

    let g = erdos_renyi(400, 0.02, &mut rng);
    let mut group = c.benchmark_group("simrank");
    group.sample_size(10);
    for (w, label) in WORKERS {
        group.bench_function(BenchmarkId::new(label, g.node_count()), |b| {
            b.iter(|| with_workers(w, || simrank(&g, 0.8, 5, 5000).unwrap()))
        });
    }
    group.finish();
}

fn matmul(c: &mut Criterion) {
    let mut rng = Rng::seed_from_u64(2);
    let mut random =
        |r: usize, k: usize| Tensor::from_vec(r, k, (0..r * k).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let (a, b) = (random(4096, 128), random(128, 128));
    let mut group = c.benchmark_group("matmul");
    for (w, label) in WORKERS {
        group.bench_function(BenchmarkId::new(label, "4096x128x128"), |bench| {
            bench.iter(|| with_workers(w, || a.matmul(&b).unwrap()))
        });
    }
    group.finish();
    eprintln!("default pool: {} workers", current_workers());
}

criterion_group!(benches, heuristics, matmul);
criterion_main!(benches);
