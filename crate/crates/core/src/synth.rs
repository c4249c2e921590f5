//! Synthetic graphs and link-prediction tasks for tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{build_graph, EdgeSet, Graph, NodeId};
use crate::io::DatasetSplit;

/// G(n, p): every unordered pair independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for v in 0..n as NodeId {
        for u in v + 1..n as NodeId {
            if rng.gen::<f64>() < p {
                edges.push((v, u));
            }
        }
    }
    build_graph(&edges, n).expect("ids in range").0
}

/// Degree-corrected planted partition.
///
/// Nodes are assigned round-robin to `communities` groups and get a degree
/// propensity `θ = exp(spread · z)`, `z ~ N(0, 1)`, rescaled to mean 1. A pair is linked with probability
/// `θ_v θ_u p_in` inside a community and `θ_v θ_u p_out` across, where the
/// two rates are set so that the expected average degree is `avg_degree`
/// and a fraction `within` of the edges falls inside communities.
/// Probabilities above 1 are clipped, so infeasible targets come out short.
pub fn planted_partition<R: Rng + ?Sized>(
    n: usize,
    communities: usize,
    avg_degree: f64,
    within: f64,
    spread: f64,
    rng: &mut R,
) -> Result<Graph> {
    if communities == 0 || communities > n {
        return Err(Error::Config(format!("need 1..={n} communities, got {communities}")));
    }
    if !(0.0..=1.0).contains(&within) {
        return Err(Error::Config(format!(
            "within fraction must lie in [0, 1], got {within}"
        )));
    }
    let mut theta: Vec<f64> = (0..n)
        .map(|_| (spread * rng.sample::<f64, _>(StandardNormal)).exp())
        .collect();
    let mean = theta.iter().sum::<f64>() / n as f64;
    theta.iter_mut().for_each(|t| *t /= mean);
    let block = |v: usize| v % communities;
    let (mut mass_in, mut mass_out) = (0.0, 0.0);
    for v in 0..n {
        for u in v + 1..n {
            let w = theta[v] * theta[u];
            if block(v) == block(u) {
                mass_in += w;
            } else {
                mass_out += w;
            }
        }
    }
    let target = avg_degree * n as f64 / 2.0;
    let p_in = if mass_in > 0.0 { within * target / mass_in } else { 0.0 };
    let p_out = if mass_out > 0.0 {
        (1.0 - within) * target / mass_out
    } else {
        0.0
    };
    let mut edges = Vec::new();
    for v in 0..n {
        for u in v + 1..n {
            let p = theta[v] * theta[u] * if block(v) == block(u) { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((v as NodeId, u as NodeId));
            }
        }
    }
    Ok(build_graph(&edges, n)?.0)
}

/// Overlapping communities: each node joins `memberships` distinct groups
/// drawn uniformly from `communities`. A pair sharing `s` groups is linked
/// with probability `1 - (1 - q)^s`, with `q` solved by bisection so that
/// the expected average degree is `avg_degree`.
pub fn overlapping_communities<R: Rng + ?Sized>(
    n: usize,
    communities: usize,
    memberships: usize,
    avg_degree: f64,
    rng: &mut R,
) -> Result<Graph> {
    if memberships == 0 || memberships > communities {
        return Err(Error::Config(format!(
            "memberships must lie in 1..={communities}, got {memberships}"
        )));
    }
    let groups: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut g = rand::seq::index::sample(rng, communities, memberships).into_vec();
            g.sort_unstable();
            g
        })
        .collect();
    let shared = |v: usize, u: usize| groups[v].iter().filter(|c| groups[u].binary_search(c).is_ok()).count();
    // histogram of shared-group counts over all pairs
    let mut hist = vec![0usize; memberships + 1];
    for v in 0..n {
        for u in v + 1..n {
            hist[shared(v, u)] += 1;
        }
    }
    let expected = |q: f64| -> f64 {
        hist.iter()
            .enumerate()
            .map(|(s, &c)| c as f64 * (1.0 - (1.0 - q).powi(s as i32)))
            .sum::<f64>()
            * 2.0
            / n as f64
    };
    if expected(1.0) < avg_degree {
        return Err(Error::Config(format!(
            "average degree {avg_degree} unreachable; at most {:.1} with this layout",
            expected(1.0)
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut edges = Vec::new();
    for v in 0..n {
        for u in v + 1..n {
            let s = shared(v, u);
            if s > 0 && rng.gen::<f64>() < 1.0 - (1.0 - q).powi(s as i32) {
                edges.push((v as NodeId, u as NodeId));
            }
        }
    }
    Ok(build_graph(&edges, n)?.0)
}

/// A task whose held-out positives all have at least two common neighbors
/// in the training graph and whose held-out negatives have none.
///
/// The graph is a union of `cliques` random 4-cliques over `n` nodes plus a
/// sparse random background with expected degree `background_degree`. One
/// edge of each clique is held out (alternating valid/test) when it still
/// has two common neighbors after all holdouts; everything else is
/// training. Negatives are non-edges with no common neighbor in the full
/// graph, one per held-out positive.
pub fn planted_cn_task<R: Rng + ?Sized>(
    n: usize,
    cliques: usize,
    background_degree: f64,
    rng: &mut R,
) -> Result<DatasetSplit> {
    if n < 4 {
        return Err(Error::Config("planted task needs at least 4 nodes".into()));
    }
    let nodes: Vec<NodeId> = (0..n as NodeId).collect();
    let mut all = EdgeSet::new();
    let mut clique_edges = Vec::with_capacity(cliques);
    for _ in 0..cliques {
        let members: Vec<NodeId> = nodes.choose_multiple(rng, 4).copied().collect();
        let mut es = Vec::with_capacity(6);
        for a in 0..4 {
            for b in a + 1..4 {
                let (v, u) = (members[a].min(members[b]), members[a].max(members[b]));
                all.insert(v, u);
                es.push((v, u));
            }
        }
        clique_edges.push(es);
    }
    let p = background_degree / (n as f64 - 1.0);
    for v in 0..n as NodeId {
        for u in v + 1..n as NodeId {
            if rng.gen::<f64>() < p {
                all.insert(v, u);
            }
        }
    }
    let mut edges: Vec<(NodeId, NodeId)> = all.iter().collect();
    edges.sort_unstable();
    let (full, _) = build_graph(&edges, n)?;

    let mut held = EdgeSet::new();
    for es in &clique_edges {
        let &(v, u) = es.choose(rng).expect("six edges");
        held.insert(v, u);
    }
    let kept: Vec<(NodeId, NodeId)> = edges.iter().copied().filter(|&(v, u)| !held.contains(v, u)).collect();
    let (train, _) = build_graph(&kept, n)?;
    let mut held: Vec<(NodeId, NodeId)> = held
        .iter()
        .filter(|&(v, u)| train.common_neighbor_ids(v, u).len() >= 2)
        .collect();
    held.sort_unstable();
    held.shuffle(rng);
    // positives dropped by the filter go back to training
    let held_set: EdgeSet = held.iter().collect();
    let train_pos: Vec<(NodeId, NodeId)> = edges
        .iter()
        .copied()
        .filter(|&(v, u)| !held_set.contains(v, u))
        .collect();

    let needed = held.len();
    let mut negatives = EdgeSet::new();
    let mut out = Vec::with_capacity(needed);
    let budget = 1000 * needed.max(1);
    for _ in 0..budget {
        if out.len() == needed {
            break;
        }
        let v = rng.gen_range(0..n as NodeId);
        let u = rng.gen_range(0..n as NodeId);
        if v == u || full.has_edge(v, u) || !full.common_neighbor_ids(v, u).is_empty() {
            continue;
        }
        if negatives.insert(v, u) {
            out.push((v.min(u), v.max(u)));
        }
    }
    if out.len() < needed {
        return Err(Error::Sampling {
            requested: needed,
            found: out.len(),
            attempts: budget,
            nodes: n,
            edges: full.edge_count(),
            density: full.edge_count() as f64 / (n * (n - 1) / 2) as f64,
        });
    }
    let half = needed / 2;
    let test_pos = held.split_off(half);
    let test_neg = out.split_off(half);
    Ok(DatasetSplit {
        train_pos,
        valid_pos: held,
        valid_neg: out,
        test_pos,
        test_neg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planted_partition_hits_target_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = planted_partition(300, 4, 60.0, 0.5, 0.3, &mut rng).unwrap();
        assert!((g.average_degree() - 60.0).abs() < 3.0, "{}", g.average_degree());
        let g = planted_partition(300, 4, 6.0, 0.5, 0.3, &mut rng).unwrap();
        assert!((g.average_degree() - 6.0).abs() < 1.0, "{}", g.average_degree());
    }

    #[test]
    fn planted_cn_labels_are_separable_by_cn() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let split = planted_cn_task(200, 40, 2.0, &mut rng).unwrap();
        let train = split.train_graph(200).unwrap();
        for &(v, u) in split.valid_pos.iter().chain(&split.test_pos) {
            assert!(!train.has_edge(v, u));
            assert!(train.common_neighbor_ids(v, u).len() >= 2);
        }
        for &(v, u) in split.valid_neg.iter().chain(&split.test_neg) {
            assert!(train.common_neighbor_ids(v, u).is_empty());
        }
        assert!(split.valid_pos.len() > 10);
        assert_eq!(split.valid_pos.len(), split.valid_neg.len());
        assert_eq!(split.test_pos.len(), split.test_neg.len());
    }
}
