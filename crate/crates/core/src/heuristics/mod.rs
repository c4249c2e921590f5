//! Pair heuristics for link prediction.
//!
//! Common-neighbor family (CN, Jaccard, Adamic-Adar, resource allocation,
//! Sorensen, Salton, hub promoted/depressed), clustering-coefficient sums,
//! truncated Katz, preferential attachment, shortest-path distance and
//! SimRank. All pair functions are generic over [`Adjacency`] and are pure
//! reads, so they can be fanned out across threads.
//!
//! Ratio heuristics return 0 when a denominator is 0. Adamic-Adar uses the
//! natural logarithm.

pub mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distance, intersect_sorted, intersection_size, Adjacency, EdgeMasked, Graph, NodeId};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum HeuristicKind {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    ResourceAllocation,
    Sorensen,
    Salton,
    HubPromoted,
    HubDepressed,
    PreferentialAttachment,
    ShortestPath,
    NodeClustering,
    NodeLinkClustering,
    Katz,
    SimRank,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 14] = [
        HeuristicKind::CommonNeighbors,
        HeuristicKind::Jaccard,
        HeuristicKind::AdamicAdar,
        HeuristicKind::ResourceAllocation,
        HeuristicKind::Sorensen,
        HeuristicKind::Salton,
        HeuristicKind::HubPromoted,
        HeuristicKind::HubDepressed,
        HeuristicKind::PreferentialAttachment,
        HeuristicKind::ShortestPath,
        HeuristicKind::NodeClustering,
        HeuristicKind::NodeLinkClustering,
        HeuristicKind::Katz,
        HeuristicKind::SimRank,
    ];

    pub fn token(self) -> &'static str {
        match self {
            HeuristicKind::CommonNeighbors => "cn",
            HeuristicKind::Jaccard => "ja",
            HeuristicKind::AdamicAdar => "aa",
            HeuristicKind::ResourceAllocation => "ra",
            HeuristicKind::Sorensen => "sorensen",
            HeuristicKind::Salton => "salton",
            HeuristicKind::HubPromoted => "hpi",
            HeuristicKind::HubDepressed => "hdi",
            HeuristicKind::PreferentialAttachment => "pa",
            HeuristicKind::ShortestPath => "spd",
            HeuristicKind::NodeClustering => "ncc",
            HeuristicKind::NodeLinkClustering => "nlcc",
            HeuristicKind::Katz => "katz",
            HeuristicKind::SimRank => "simrank",
        }
    }

    /// Integer-valued heuristics get identity vocabularies when encoded.
    pub fn is_integer(self) -> bool {
        matches!(
            self,
            HeuristicKind::CommonNeighbors | HeuristicKind::PreferentialAttachment | HeuristicKind::ShortestPath
        )
    }

    pub fn valid_tokens() -> String {
        Self::ALL.map(|k| k.token()).join(", ")
    }

    /// Parses a comma-separated token list such as `cn,aa,spd`.
    pub fn parse_list(list: &str) -> Result<Vec<HeuristicKind>> {
        list.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| Error::UnknownHeuristic {
                name: s.to_string(),
                valid: Self::valid_tokens(),
            })
    }
}

impl TryFrom<String> for HeuristicKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HeuristicKind> for String {
    fn from(k: HeuristicKind) -> String {
        k.token().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicConfig {
    /// Katz damping factor, in (0, 1).
    pub katz_beta: f64,
    /// Longest walk length summed by truncated Katz.
    pub katz_max_len: usize,
    /// SimRank decay, in (0, 1).
    pub simrank_decay: f64,
    pub simrank_iters: usize,
    /// Largest graph SimRank will run on (its matrix is n x n).
    pub simrank_max_nodes: usize,
    /// BFS depth limit for shortest-path distance.
    pub spd_cap: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            katz_beta: 0.05,
            katz_max_len: 3,
            simrank_decay: 0.8,
            simrank_iters: 5,
            simrank_max_nodes: 5000,
            spd_cap: 6,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.katz_beta) {
            return Err(Error::Config(format!(
                "katz_beta must be in (0,1), got {}",
                self.katz_beta
            )));
        }
        if !open_unit(self.simrank_decay) {
            return Err(Error::Config(format!(
                "simrank_decay must be in (0,1), got {}",
                self.simrank_decay
            )));
        }
        for (name, v) in [
            ("katz_max_len", self.katz_max_len),
            ("simrank_iters", self.simrank_iters),
            ("spd_cap", self.spd_cap),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }
}

pub fn cn<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> usize {
    intersection_size(&g.neighbors(v), &g.neighbors(u))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn jaccard<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let common = cn(g, v, u);
    let union = g.degree(v) + g.degree(u) - common;
    ratio(common as f64, union as f64)
}

pub fn adamic_adar<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    intersect_sorted(&g.neighbors(v), &g.neighbors(u))
        .into_iter()
        .map(|z| ratio(1.0, (g.degree(z) as f64).ln()))
        .sum()
}

pub fn resource_allocation<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    intersect_sorted(&g.neighbors(v), &g.neighbors(u))
        .into_iter()
        .map(|z| ratio(1.0, g.degree(z) as f64))
        .sum()
}

pub fn sorensen<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let (dv, du) = (g.degree(v) as f64, g.degree(u) as f64);
    ratio(2.0 * cn(g, v, u) as f64, dv + du)
}

pub fn salton<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let (dv, du) = (g.degree(v) as f64, g.degree(u) as f64);
    ratio(cn(g, v, u) as f64, (dv * du).sqrt())
}

pub fn hub_promoted<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let den = g.degree(v).min(g.degree(u));
    ratio(cn(g, v, u) as f64, den as f64)
}

pub fn hub_depressed<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let den = g.degree(v).max(g.degree(u));
    ratio(cn(g, v, u) as f64, den as f64)
}

pub fn preferential_attachment<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> u64 {
    g.degree(v) as u64 * g.degree(u) as u64
}

/// Hop distance, or `cap + 1` when `u` is not reachable within `cap` hops.
pub fn shortest_path_distance<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId, cap: usize) -> usize {
    bfs_distance(g, v, u, cap).unwrap_or(cap + 1)
}

/// Fraction of pairs of `z`'s neighbors that are themselves adjacent.
pub fn local_clustering<G: Adjacency + ?Sized>(g: &G, z: NodeId) -> f64 {
    let nz = g.neighbors(z);
    let d = nz.len();
    if d <= 1 {
        return 0.0;
    }
    let twice_links: usize = nz.iter().map(|&j| intersection_size(&g.neighbors(j), &nz)).sum();
    twice_links as f64 / (d * (d - 1)) as f64
}

/// Sum of local clustering coefficients over the common neighbors.
pub fn node_clustering<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    intersect_sorted(&g.neighbors(v), &g.neighbors(u))
        .into_iter()
        .map(|z| local_clustering(g, z))
        .sum()
}

/// Sum over common neighbors `z` of
/// `(|Γv∩Γz| + |Γu∩Γz|) / (|Γz| - 1) * C(z)`.
pub fn node_link_clustering<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId) -> f64 {
    let (nv, nu) = (g.neighbors(v), g.neighbors(u));
    intersect_sorted(&nv, &nu)
        .into_iter()
        .map(|z| {
            let nz = g.neighbors(z);
            if nz.len() <= 1 {
                return 0.0;
            }
            let c = local_clustering(g, z);
            let den = (nz.len() - 1) as f64;
            intersection_size(&nv, &nz) as f64 / den * c + intersection_size(&nu, &nz) as f64 / den * c
        })
        .sum()
}

/// `Σ_{l=1..max_len} beta^l (A^l)[v][u]`: damped walk counts, expanded as
/// sparse frontiers from `v`.
pub fn katz_truncated<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId, beta: f64, max_len: usize) -> f64 {
    let n = g.node_count();
    let mut counts = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut frontier = vec![v];
    let mut touched = Vec::new();
    counts[v as usize] = 1.0;
    let mut score = 0.0;
    let mut damp = 1.0;
    for _ in 0..max_len {
        for &x in &frontier {
            let w = counts[x as usize];
            for &y in g.neighbors(x).iter() {
                if next[y as usize] == 0.0 {
                    touched.push(y);
                }
                next[y as usize] += w;
            }
        }
        for &x in &frontier {
            counts[x as usize] = 0.0;
        }
        damp *= beta;
        score += damp * next[u as usize];
        std::mem::swap(&mut counts, &mut next);
        frontier.clear();
        std::mem::swap(&mut frontier, &mut touched);
        if frontier.is_empty() {
            break;
        }
    }
    score
}

/// Dense symmetric all-pairs SimRank scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRankMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimRankMatrix {
    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.values[i as usize * self.n + j as usize]
    }

    pub fn row(&self, i: NodeId) -> &[f64] {
        &self.values[i as usize * self.n..(i as usize + 1) * self.n]
    }
}

/// Iterative SimRank with the diagonal held at 1.
///
/// Each iteration computes
/// `s'(i,j) = C / (|Γi||Γj|) Σ_{a∈Γi} Σ_{b∈Γj} s(a,b)` in two sparse passes
/// (`O(n · nnz)` instead of `O(n² d²)`); pairs with an empty neighborhood
/// stay at 0.
pub fn simrank<G: Adjacency + ?Sized>(g: &G, decay: f64, iters: usize, max_nodes: usize) -> Result<SimRankMatrix> {
    let n = g.node_count();
    if n > max_nodes {
        return Err(Error::SimRankTooLarge {
            nodes: n,
            limit: max_nodes,
            bytes: n * n * std::mem::size_of::<f64>(),
        });
    }
    let adj: Vec<Vec<NodeId>> = (0..n as NodeId).map(|v| g.neighbors(v).into_owned()).collect();
    let mut s = SimRankMatrix::identity(n);
    let mut partial = vec![0.0; n * n];
    for _ in 0..iters {
        // partial[a][j] = Σ_{b∈Γj} s[a][b]
        par::for_each_row(&mut partial, n, |a, row| {
            let sa = &s.values[a * n..(a + 1) * n];
            for (j, out) in row.iter_mut().enumerate() {
                *out = adj[j].iter().map(|&b| sa[b as usize]).sum();
            }
        });
        let mut next = vec![0.0; n * n];
        par::for_each_row(&mut next, n, |i, row| {
            let di = adj[i].len();
            if di == 0 {
                row[i] = 1.0;
                return;
            }
            for &a in &adj[i] {
                let pa = &partial[a as usize * n..(a as usize + 1) * n];
                for (out, &p) in row.iter_mut().zip(pa) {
                    *out += p;
                }
            }
            for (j, out) in row.iter_mut().enumerate() {
                let dj = adj[j].len();
                *out = if dj == 0 { 0.0 } else { decay * *out / (di * dj) as f64 };
            }
            row[i] = 1.0;
        });
        for i in 0..n {
            for j in i + 1..n {
                next[j * n + i] = next[i * n + j];
            }
        }
        s.values = next;
    }
    Ok(s)
}

/// Scores pairs for a fixed set of heuristic kinds on one graph.
///
/// Holds the SimRank matrix when SimRank is requested so it is computed once.
pub struct Scorer<'g> {
    graph: &'g Graph,
    cfg: HeuristicConfig,
    simrank: Option<SimRankMatrix>,
}

impl<'g> Scorer<'g> {
    pub fn new(graph: &'g Graph, kinds: &[HeuristicKind], cfg: HeuristicConfig) -> Result<Self> {
        let simrank = if kinds.contains(&HeuristicKind::SimRank) {
            Some(simrank(
                graph,
                cfg.simrank_decay,
                cfg.simrank_iters,
                cfg.simrank_max_nodes,
            )?)
        } else {
            None
        };
        Ok(Self { graph, cfg, simrank })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn score(&self, v: NodeId, u: NodeId, kind: HeuristicKind) -> f64 {
        self.score_on(self.graph, v, u, kind)
    }

    /// Scores `(v, u)` as if the edge between them were absent.
    ///
    /// SimRank is global and is read from the unmasked matrix.
    pub fn score_masked(&self, v: NodeId, u: NodeId, kind: HeuristicKind) -> f64 {
        if self.graph.has_edge(v, u) {
            self.score_on(&EdgeMasked::new(self.graph, v, u), v, u, kind)
        } else {
            self.score_on(self.graph, v, u, kind)
        }
    }

    fn score_on<G: Adjacency + ?Sized>(&self, g: &G, v: NodeId, u: NodeId, kind: HeuristicKind) -> f64 {
        use HeuristicKind::*;
        match kind {
            CommonNeighbors => cn(g, v, u) as f64,
            Jaccard => jaccard(g, v, u),
            AdamicAdar => adamic_adar(g, v, u),
            ResourceAllocation => resource_allocation(g, v, u),
            Sorensen => sorensen(g, v, u),
            Salton => salton(g, v, u),
            HubPromoted => hub_promoted(g, v, u),
            HubDepressed => hub_depressed(g, v, u),
            PreferentialAttachment => preferential_attachment(g, v, u) as f64,
            ShortestPath => shortest_path_distance(g, v, u, self.cfg.spd_cap) as f64,
            NodeClustering => node_clustering(g, v, u),
            NodeLinkClustering => node_link_clustering(g, v, u),
            Katz => katz_truncated(g, v, u, self.cfg.katz_beta, self.cfg.katz_max_len),
            SimRank => self.simrank.as_ref().expect("scorer built without SimRank").get(v, u),
        }
    }

    /// Row-major `pairs.len() x kinds.len()` scores; rows follow `pairs`.
    pub fn score_pairs(&self, pairs: &[(NodeId, NodeId)], kinds: &[HeuristicKind], masked: bool) -> ScoreMatrix {
        let rows = par::map_indexed(pairs.len(), |i| {
            let (v, u) = pairs[i];
            kinds
                .iter()
                .map(|&k| {
                    if masked {
                        self.score_masked(v, u, k)
                    } else {
                        self.score(v, u, k)
                    }
                })
                .collect::<Vec<f64>>()
        });
        ScoreMatrix {
            kinds: kinds.to_vec(),
            values: rows.concat(),
        }
    }
}

/// One row per pair, one column per heuristic kind.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub kinds: Vec<HeuristicKind>,
    pub values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn rows(&self) -> usize {
        if self.kinds.is_empty() {
            0
        } else {
            self.values.len() / self.kinds.len()
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.kinds.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn column(&self, kind_index: usize) -> Vec<f64> {
        (0..self.rows()).map(|i| self.row(i)[kind_index]).collect()
    }
}

/// Scores every pair for every requested kind, in parallel over pairs.
pub fn batch_score(
    g: &Graph,
    pairs: &[(NodeId, NodeId)],
    kinds: &[HeuristicKind],
    cfg: &HeuristicConfig,
) -> Result<ScoreMatrix> {
    for &(v, u) in pairs {
        if v as usize >= g.node_count() || u as usize >= g.node_count() {
            return Err(Error::Data(format!(
                "pair ({v}, {u}) out of range for {} nodes",
                g.node_count()
            )));
        }
    }
    Ok(Scorer::new(g, kinds, *cfg)?.score_pairs(pairs, kinds, false))
}

/// `%.9g`-style formatting used in heuristic CSV output.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_zeros(&fixed).to_string()
    } else {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Formats a heuristic value: integers kinds without a fractional part.
pub fn format_value(kind: HeuristicKind, x: f64) -> String {
    if kind.is_integer() {
        format!("{}", x as u64)
    } else {
        format_sig9(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    fn example_graph() -> Graph {
        build_graph(&[(1, 2), (1, 3), (1, 5), (1, 6), (4, 5), (4, 6)], 7)
            .unwrap()
            .0
    }

    fn graph(edges: &[(u32, u32)], n: usize) -> Graph {
        build_graph(edges, n).unwrap().0
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn token_round_trip_and_unknown() {
        for k in HeuristicKind::ALL {
            assert_eq!(k.token().parse::<HeuristicKind>().unwrap(), k);
        }
        let err = "foo".parse::<HeuristicKind>().unwrap_err().to_string();
        assert!(err.contains("simrank") && err.contains("cn"), "{err}");
        assert_eq!(
            HeuristicKind::parse_list("cn, aa").unwrap(),
            vec![HeuristicKind::CommonNeighbors, HeuristicKind::AdamicAdar]
        );
    }

    #[test]
    fn example_graph_values() {
        let g = example_graph();
        assert_eq!(cn(&g, 1, 4), 2);
        assert!(close(jaccard(&g, 1, 4), 0.5));
        assert!(close(sorensen(&g, 1, 4), 4.0 / 6.0));
        assert!(close(salton(&g, 1, 4), 2.0 / 8f64.sqrt()));
        assert!(close(hub_promoted(&g, 1, 4), 1.0));
        assert!(close(hub_depressed(&g, 1, 4), 0.5));
        assert_eq!(preferential_attachment(&g, 1, 4), 8);
        assert_eq!(preferential_attachment(&g, 1, 1), 16);
        assert_eq!(preferential_attachment(&g, 0, 1), 0);
    }

    #[test]
    fn edgeless_and_isolated() {
        let g = graph(&[], 4);
        assert_eq!(cn(&g, 0, 1), 0);
        assert_eq!(jaccard(&g, 0, 1), 0.0);
        let g = example_graph();
        for f in [sorensen::<Graph>, salton, hub_promoted, hub_depressed] {
            assert_eq!(f(&g, 0, 1), 0.0);
        }
    }

    #[test]
    fn self_pair_identities() {
        let g = example_graph();
        for f in [jaccard::<Graph>, sorensen, salton, hub_promoted, hub_depressed] {
            assert!(close(f(&g, 1, 1), 1.0));
        }
    }

    #[test]
    fn triangle_aa_ra_and_clustering() {
        let g = graph(&[(0, 1), (1, 2), (0, 2)], 3);
        assert!(close(adamic_adar(&g, 0, 1), 1.0 / 2f64.ln()));
        assert!(close(resource_allocation(&g, 0, 1), 0.5));
        assert!(close(local_clustering(&g, 0), 1.0));
        assert!(close(node_clustering(&g, 0, 1), 1.0));
        assert!(close(node_link_clustering(&g, 0, 1), 2.0));
    }

    #[test]
    fn star_hub() {
        // hub 0 with leaves 1..=5
        let edges: Vec<_> = (1..=5).map(|l| (0, l)).collect();
        let g = graph(&edges, 6);
        assert!(close(adamic_adar(&g, 1, 2), 1.0 / 5f64.ln()));
        assert!(close(resource_allocation(&g, 1, 2), 0.2));
        assert_eq!(local_clustering(&g, 0), 0.0);
        assert_eq!(adamic_adar(&g, 0, 1), 0.0);
        assert_eq!(node_clustering(&g, 0, 1), 0.0);
        assert_eq!(node_link_clustering(&g, 0, 1), 0.0);
    }

    #[test]
    fn shortest_paths() {
        let g = graph(&[(0, 1), (1, 2), (2, 3), (4, 5)], 6);
        assert_eq!(shortest_path_distance(&g, 0, 1, 6), 1);
        assert_eq!(shortest_path_distance(&g, 0, 3, 6), 3);
        assert_eq!(shortest_path_distance(&g, 0, 0, 6), 0);
        assert_eq!(shortest_path_distance(&g, 0, 5, 6), 7);
        assert_eq!(shortest_path_distance(&g, 0, 3, 2), 3);
    }

    #[test]
    fn katz_small_cases() {
        // path a-b-c: one walk of length 2 and two of length 4 from a to c
        let g = graph(&[(0, 1), (1, 2)], 3);
        let k = katz_truncated(&g, 0, 2, 0.1, 4);
        assert!((k - 0.0102).abs() < 1e-15, "{k}");
        assert!(close(katz_truncated(&g, 0, 1, 0.3, 1), 0.3));
        assert_eq!(katz_truncated(&g, 0, 2, 0.0, 4), 0.0);
        let iso = graph(&[(0, 1)], 3);
        assert_eq!(katz_truncated(&iso, 2, 0, 0.5, 5), 0.0);
    }

    #[test]
    fn length_four_walks_equal_neighbor_common_neighbor_sums() {
        // |walks^(4)(v,u)| = Σ_{a∈Γv, b∈Γu} CN(a,b)
        let g = graph(
            &[
                (0, 1),
                (0, 2),
                (1, 2),
                (1, 3),
                (2, 4),
                (3, 4),
                (3, 5),
                (4, 5),
                (5, 6),
                (0, 6),
            ],
            7,
        );
        for v in 0..7 {
            for u in 0..7 {
                let via_cn: usize = g
                    .neighbors(v)
                    .iter()
                    .flat_map(|&a| g.neighbors(u).iter().map(move |&b| (a, b)))
                    .map(|(a, b)| cn(&g, a, b))
                    .sum();
                let l4 = katz_truncated(&g, v, u, 1.0, 4) - katz_truncated(&g, v, u, 1.0, 3);
                assert_eq!(l4, via_cn as f64, "({v},{u})");
            }
        }
    }

    #[test]
    fn simrank_shared_hub_and_identity() {
        let g = graph(&[(0, 1), (0, 2)], 3);
        let s = simrank(&g, 0.8, 1, 100).unwrap();
        assert_eq!(s.get(1, 2), 0.8);
        assert_eq!(s.get(1, 1), 1.0);
        let s0 = simrank(&g, 0.8, 0, 100).unwrap();
        assert_eq!(s0, SimRankMatrix::identity(3));
        assert!(matches!(simrank(&g, 0.8, 1, 2), Err(Error::SimRankTooLarge { .. })));
    }

    #[test]
    fn masked_scoring_hides_target_edge() {
        let g = graph(&[(0, 1), (1, 2), (0, 2), (2, 3)], 4);
        let s = Scorer::new(&g, &[HeuristicKind::ShortestPath], HeuristicConfig::default()).unwrap();
        assert_eq!(s.score(0, 1, HeuristicKind::ShortestPath), 1.0);
        assert_eq!(s.score_masked(0, 1, HeuristicKind::ShortestPath), 2.0);
        assert_eq!(s.score_masked(0, 3, HeuristicKind::ShortestPath), 2.0);
        assert_eq!(s.score_masked(0, 1, HeuristicKind::PreferentialAttachment), 1.0);
        assert_eq!(s.score_masked(0, 1, HeuristicKind::CommonNeighbors), 1.0);
    }

    #[test]
    fn batch_score_rows() {
        let g = example_graph();
        let kinds = [HeuristicKind::CommonNeighbors, HeuristicKind::PreferentialAttachment];
        let m = batch_score(&g, &[(1, 4)], &kinds, &HeuristicConfig::default()).unwrap();
        assert_eq!(m.row(0), &[2.0, 8.0]);
        let empty = batch_score(&g, &[], &kinds, &HeuristicConfig::default()).unwrap();
        assert_eq!(empty.rows(), 0);
        assert!(batch_score(&g, &[(1, 9)], &kinds, &HeuristicConfig::default()).is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(2.0 / 2f64.ln()), "2.88539008");
        assert_eq!(format_sig9(0.5), "0.5");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(123456789.0), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig9(0.0001), "0.0001");
        assert_eq!(format_sig9(0.00001234), "1.234e-05");
        assert_eq!(format_sig9(-0.25), "-0.25");
        assert_eq!(format_value(HeuristicKind::CommonNeighbors, 2.0), "2");
    }

    #[test]
    fn config_validation() {
        assert!(HeuristicConfig::default().validate().is_ok());
        let bad = HeuristicConfig {
            katz_beta: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = HeuristicConfig {
            simrank_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
