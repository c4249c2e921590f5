use linkpred::graph::build_graph;
use linkpred::heuristics::{batch_score, HeuristicConfig, HeuristicKind, Scorer};
use linkpred::rng::Rng;
use linkpred::synth::erdos_renyi;
use linkpred::NodeId;
use proptest::prelude::*;
use rand::SeedableRng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_heuristic_is_symmetric(seed in any::<u64>(), n in 3usize..30, p in 0.05f64..0.5) {
        let g = erdos_renyi(n, p, &mut Rng::seed_from_u64(seed));
        let kinds = HeuristicKind::ALL;
        let s = Scorer::new(&g, &kinds, HeuristicConfig::default()).unwrap();
        for v in 0..n as NodeId {
            for u in v + 1..n as NodeId {
                for k in kinds {
                    let (a, b) = (s.score(v, u, k), s.score(u, v, k));
                    prop_assert!(close(a, b), "{k:?} ({v}, {u}): {a} vs {b}");
                    let (a, b) = (s.score_masked(v, u, k), s.score_masked(u, v, k));
                    prop_assert!(close(a, b), "masked {k:?} ({v}, {u}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn masking_equals_deleting_the_edge(seed in any::<u64>(), n in 3usize..30, p in 0.1f64..0.5) {
        let g = erdos_renyi(n, p, &mut Rng::seed_from_u64(seed));
        // SimRank is global and deliberately read unmasked
        let kinds: Vec<_> = HeuristicKind::ALL.into_iter().filter(|&k| k != HeuristicKind::SimRank).collect();
        let cfg = HeuristicConfig::default();
        let s = Scorer::new(&g, &kinds, cfg).unwrap();
        let edges: Vec<_> = g.edges().collect();
        for &(v, u) in edges.iter().take(8) {
            let rest: Vec<_> = edges.iter().copied().filter(|&e| e != (v, u)).collect();
            let (h, _) = build_graph(&rest, n).unwrap();
            let reference = Scorer::new(&h, &kinds, cfg).unwrap();
            for &k in &kinds {
                let (a, b) = (s.score_masked(v, u, k), reference.score(v, u, k));
                prop_assert_eq!(a, b, "{:?} on ({}, {})", k, v, u);
            }
        }
    }
}

#[test]
fn batch_scoring_rejects_out_of_range_pairs() {
    let (g, _) = build_graph(&[(0, 1)], 2).unwrap();
    let err = batch_score(
        &g,
        &[(0, 2)],
        &[HeuristicKind::CommonNeighbors],
        &HeuristicConfig::default(),
    )
    .unwrap_err();
    assert!(err.is_data_error());
}

#[test]
fn batch_scoring_is_independent_of_workers() {
    let g = erdos_renyi(200, 0.05, &mut Rng::seed_from_u64(9));
    let pairs: Vec<(NodeId, NodeId)> = (0..500).map(|i| (i % 200, (i * 7 + 3) % 200)).collect();
    let kinds = HeuristicKind::ALL;
    let cfg = HeuristicConfig::default();
    let one = linkpred::par::with_workers(1, || batch_score(&g, &pairs, &kinds, &cfg).unwrap());
    let many = linkpred::par::with_workers(4, || batch_score(&g, &pairs, &kinds, &cfg).unwrap());
    assert_eq!(one, many);
}
