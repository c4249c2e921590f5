//! Dense brute-force reference implementations.
//!
//! Everything here is computed from an explicit adjacency matrix and hash
//! sets: set algebra for the common-neighbor family, Floyd-Warshall for
//! distances, dense matrix powers for Katz and a literal double-sum SimRank.
//! None of it shares code with the sparse fast paths. Intended for graphs of
//! at most a few dozen nodes.

use std::collections::HashSet;

use crate::graph::{Graph, NodeId};

use super::{HeuristicConfig, HeuristicKind};

pub struct DenseOracle {
    n: usize,
    adj: Vec<Vec<bool>>,
    sets: Vec<HashSet<usize>>,
    dist: Vec<Vec<usize>>,
    katz: Vec<Vec<f64>>,
    simrank: Vec<Vec<f64>>,
    cfg: HeuristicConfig,
}

impl DenseOracle {
    pub fn new(g: &Graph, cfg: &HeuristicConfig) -> Self {
        let n = g.node_count();
        let mut adj = vec![vec![false; n]; n];
        for (v, u) in g.edges() {
            adj[v as usize][u as usize] = true;
            adj[u as usize][v as usize] = true;
        }
        let sets: Vec<HashSet<usize>> = (0..n).map(|i| (0..n).filter(|&j| adj[i][j]).collect()).collect();
        let dist = floyd_warshall(&adj);
        let katz = katz_by_matrix_powers(&adj, cfg.katz_beta, cfg.katz_max_len);
        let simrank = simrank_literal(&adj, cfg.simrank_decay, cfg.simrank_iters);
        Self {
            n,
            adj,
            sets,
            dist,
            katz,
            simrank,
            cfg: *cfg,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    fn common(&self, v: usize, u: usize) -> HashSet<usize> {
        self.sets[v].intersection(&self.sets[u]).copied().collect()
    }

    fn deg(&self, v: usize) -> f64 {
        self.sets[v].len() as f64
    }

    fn clustering(&self, z: usize) -> f64 {
        let nz: Vec<usize> = self.sets[z].iter().copied().collect();
        let d = nz.len();
        if d < 2 {
            return 0.0;
        }
        let mut links = 0usize;
        for a in 0..d {
            for b in a + 1..d {
                if self.adj[nz[a]][nz[b]] {
                    links += 1;
                }
            }
        }
        2.0 * links as f64 / (d as f64 * (d as f64 - 1.0))
    }

    pub fn score(&self, v: NodeId, u: NodeId, kind: HeuristicKind) -> f64 {
        use HeuristicKind::*;
        let (v, u) = (v as usize, u as usize);
        let common = self.common(v, u);
        let c = common.len() as f64;
        let (dv, du) = (self.deg(v), self.deg(u));
        let safe = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
        match kind {
            CommonNeighbors => c,
            Jaccard => {
                let union: HashSet<usize> = self.sets[v].union(&self.sets[u]).copied().collect();
                safe(c, union.len() as f64)
            }
            AdamicAdar => common.iter().map(|&z| safe(1.0, self.deg(z).ln())).sum(),
            ResourceAllocation => common.iter().map(|&z| safe(1.0, self.deg(z))).sum(),
            Sorensen => safe(2.0 * c, dv + du),
            Salton => safe(c, (dv * du).sqrt()),
            HubPromoted => safe(c, dv.min(du)),
            HubDepressed => safe(c, dv.max(du)),
            PreferentialAttachment => dv * du,
            ShortestPath => {
                let d = self.dist[v][u];
                if d > self.cfg.spd_cap {
                    (self.cfg.spd_cap + 1) as f64
                } else {
                    d as f64
                }
            }
            NodeClustering => common.iter().map(|&z| self.clustering(z)).sum(),
            NodeLinkClustering => common
                .iter()
                .map(|&z| {
                    let dz = self.deg(z);
                    if dz <= 1.0 {
                        return 0.0;
                    }
                    let cz = self.clustering(z);
                    let vz = self.common(v, z).len() as f64;
                    let uz = self.common(u, z).len() as f64;
                    vz / (dz - 1.0) * cz + uz / (dz - 1.0) * cz
                })
                .sum(),
            Katz => self.katz[v][u],
            SimRank => self.simrank[v][u],
        }
    }
}

/// One-shot oracle evaluation; builds the dense structures on every call.
pub fn oracle_dense_heuristics(g: &Graph, v: NodeId, u: NodeId, kind: HeuristicKind, cfg: &HeuristicConfig) -> f64 {
    DenseOracle::new(g, cfg).score(v, u, kind)
}

/// All-pairs hop distances; `usize::MAX` marks unreachable pairs.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            if *x >= inf {
                *x = usize::MAX;
            }
        }
    }
    d
}

fn dense_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

/// `Σ_{l=1..max_len} beta^l A^l` by explicit dense powers.
pub fn katz_by_matrix_powers(adj: &[Vec<bool>], beta: f64, max_len: usize) -> Vec<Vec<f64>> {
    let n = adj.len();
    let a: Vec<Vec<f64>> = adj
        .iter()
        .map(|r| r.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut power = a.clone();
    let mut total = vec![vec![0.0; n]; n];
    for l in 1..=max_len {
        if l > 1 {
            power = dense_matmul(&power, &a);
        }
        let w = beta.powi(l as i32);
        for i in 0..n {
            for j in 0..n {
                total[i][j] += w * power[i][j];
            }
        }
    }
    total
}

/// SimRank exactly as the iteration is written: for each pair, the double
/// sum over neighbor pairs of the previous matrix, scaled by
/// `C / (|Γi||Γj|)`; the diagonal is reset to 1 after each iteration.
pub fn simrank_literal(adj: &[Vec<bool>], decay: f64, iters: usize) -> Vec<Vec<f64>> {
    let n = adj.len();
    let nbrs: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| adj[i][j]).collect()).collect();
    let mut s: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..iters {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    next[i][j] = 1.0;
                    continue;
                }
                let (gi, gj) = (&nbrs[i], &nbrs[j]);
                if gi.is_empty() || gj.is_empty() {
                    continue;
                }
                let mut sum = 0.0;
                for b in 0..gj.len() {
                    for a in 0..gi.len() {
                        sum += s[gi[a]][gj[b]];
                    }
                }
                next[i][j] = decay / (gi.len() * gj.len()) as f64 * sum;
            }
        }
        s = next;
    }
    s
}
