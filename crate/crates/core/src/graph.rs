//! Immutable undirected simple graph in compressed sparse row form.
//!
//! ```text
//! offsets[0] = 0, offsets[v+1] = offsets[v] + deg(v), offsets[N] = 2|E|
//! neighbors(v) = neighbor_ids[offsets[v] .. offsets[v+1]]   (sorted, no v)
//! ```

use std::borrow::Cow;
use std::collections::{HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Read access to an undirected neighbor structure.
///
/// Heuristics are generic over this trait so they can run on a [`Graph`] or
/// on an [`EdgeMasked`] view that hides one edge.
pub trait Adjacency: Sync {
    fn node_count(&self) -> usize;

    /// Sorted, duplicate-free neighbor ids of `v`.
    fn neighbors(&self, v: NodeId) -> Cow<'_, [NodeId]>;

    fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    fn has_edge(&self, v: NodeId, u: NodeId) -> bool {
        self.neighbors(v).binary_search(&u).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    node_count: usize,
    offsets: Vec<usize>,
    neighbor_ids: Vec<NodeId>,
    edge_count: usize,
}

/// What [`build_graph`] discarded while normalizing its input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

/// Builds a CSR graph from an arbitrary edge list.
///
/// Edges are symmetrized; repeated pairs (in either orientation) and
/// self-loops are dropped and counted in the report.
pub fn build_graph(edges: &[(NodeId, NodeId)], node_count: usize) -> Result<(Graph, BuildReport)> {
    let mut report = BuildReport::default();
    let mut pairs = Vec::with_capacity(edges.len());
    for (index, &(v, u)) in edges.iter().enumerate() {
        if v as usize >= node_count || u as usize >= node_count {
            return Err(Error::NodeOutOfRange {
                index,
                v: v.into(),
                u: u.into(),
                node_count,
            });
        }
        if v == u {
            report.self_loops += 1;
            continue;
        }
        pairs.push((v.min(u), v.max(u)));
    }
    pairs.sort_unstable();
    let before = pairs.len();
    pairs.dedup();
    report.duplicates = before - pairs.len();

    let mut degree = vec![0usize; node_count];
    for &(a, b) in &pairs {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    let mut offsets = Vec::with_capacity(node_count + 1);
    offsets.push(0);
    for d in &degree {
        offsets.push(offsets.last().unwrap() + d);
    }
    let mut cursor = offsets[..node_count].to_vec();
    let mut neighbor_ids = vec![0; 2 * pairs.len()];
    for &(a, b) in &pairs {
        neighbor_ids[cursor[a as usize]] = b;
        cursor[a as usize] += 1;
        neighbor_ids[cursor[b as usize]] = a;
        cursor[b as usize] += 1;
    }
    for v in 0..node_count {
        neighbor_ids[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    let graph = Graph {
        node_count,
        offsets,
        neighbor_ids,
        edge_count: pairs.len(),
    };
    Ok((graph, report))
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_ids(&self) -> &[NodeId] {
        &self.neighbor_ids
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.neighbor_ids[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn average_degree(&self) -> f64 {
        if self.node_count == 0 {
            return 0.0;
        }
        self.neighbor_ids.len() as f64 / self.node_count as f64
    }

    #[inline]
    pub fn has_edge(&self, v: NodeId, u: NodeId) -> bool {
        self.neighbors(v).binary_search(&u).is_ok()
    }

    /// Each undirected edge once, as `(min, max)`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count as NodeId)
            .flat_map(move |v| self.neighbors(v).iter().filter(move |&&u| u > v).map(move |&u| (v, u)))
    }

    /// Sorted intersection of the two neighbor slices by linear merge.
    pub fn common_neighbor_ids(&self, v: NodeId, u: NodeId) -> Vec<NodeId> {
        intersect_sorted(self.neighbors(v), self.neighbors(u))
    }

    /// Nodes within `hops` of `v`, including `v`, in ascending order.
    pub fn ball(&self, v: NodeId, hops: usize) -> Vec<NodeId> {
        let mut dist = vec![usize::MAX; self.node_count];
        let mut queue = VecDeque::new();
        dist[v as usize] = 0;
        queue.push_back(v);
        while let Some(x) = queue.pop_front() {
            let d = dist[x as usize];
            if d == hops {
                continue;
            }
            for &y in self.neighbors(x) {
                if dist[y as usize] == usize::MAX {
                    dist[y as usize] = d + 1;
                    queue.push_back(y);
                }
            }
        }
        (0..self.node_count as NodeId)
            .filter(|&x| dist[x as usize] != usize::MAX)
            .collect()
    }

    /// Number of unordered non-adjacent pairs of distinct nodes.
    pub fn non_edge_count(&self) -> usize {
        let n = self.node_count;
        (n * n.saturating_sub(1)) / 2 - self.edge_count
    }
}

impl Adjacency for Graph {
    fn node_count(&self) -> usize {
        self.node_count
    }

    fn neighbors(&self, v: NodeId) -> Cow<'_, [NodeId]> {
        Cow::Borrowed(Graph::neighbors(self, v))
    }

    fn degree(&self, v: NodeId) -> usize {
        Graph::degree(self, v)
    }

    fn has_edge(&self, v: NodeId, u: NodeId) -> bool {
        Graph::has_edge(self, v, u)
    }
}

/// A graph with the single edge `{a, b}` hidden (a no-op when absent).
///
/// Used to score a pair that is itself a training edge without letting the
/// edge leak into its own heuristic values.
#[derive(Debug, Clone, Copy)]
pub struct EdgeMasked<'a> {
    graph: &'a Graph,
    a: NodeId,
    b: NodeId,
}

impl<'a> EdgeMasked<'a> {
    pub fn new(graph: &'a Graph, a: NodeId, b: NodeId) -> Self {
        Self { graph, a, b }
    }
}

impl Adjacency for EdgeMasked<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count
    }

    fn neighbors(&self, v: NodeId) -> Cow<'_, [NodeId]> {
        let other = if v == self.a {
            self.b
        } else if v == self.b {
            self.a
        } else {
            return Cow::Borrowed(self.graph.neighbors(v));
        };
        let slice = self.graph.neighbors(v);
        match slice.binary_search(&other) {
            Ok(pos) => {
                let mut owned = Vec::with_capacity(slice.len() - 1);
                owned.extend_from_slice(&slice[..pos]);
                owned.extend_from_slice(&slice[pos + 1..]);
                Cow::Owned(owned)
            }
            Err(_) => Cow::Borrowed(slice),
        }
    }
}

pub fn intersect_sorted(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub fn intersection_size(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Hop distance from `v` to `u` by BFS, or `None` if farther than `cap`.
pub fn bfs_distance<G: Adjacency + ?Sized>(g: &G, v: NodeId, u: NodeId, cap: usize) -> Option<usize> {
    if v == u {
        return Some(0);
    }
    let mut seen = HashSet::new();
    seen.insert(v);
    let mut frontier = vec![v];
    for depth in 1..=cap {
        let mut next = Vec::new();
        for &x in &frontier {
            for &y in g.neighbors(x).iter() {
                if y == u {
                    return Some(depth);
                }
                if seen.insert(y) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// Unordered node pairs, stored normalized as `(min, max)`.
#[derive(Debug, Clone, Default)]
pub struct EdgeSet(HashSet<(NodeId, NodeId)>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: NodeId, u: NodeId) -> bool {
        self.0.insert((v.min(u), v.max(u)))
    }

    pub fn contains(&self, v: NodeId, u: NodeId) -> bool {
        self.0.contains(&(v.min(u), v.max(u)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Iteration order is unspecified; sort before relying on it.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.0.iter().copied()
    }
}

impl<'a> FromIterator<&'a (NodeId, NodeId)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = &'a (NodeId, NodeId)>>(iter: I) -> Self {
        let mut set = EdgeSet::new();
        for &(v, u) in iter {
            set.insert(v, u);
        }
        set
    }
}

impl Extend<(NodeId, NodeId)> for EdgeSet {
    fn extend<I: IntoIterator<Item = (NodeId, NodeId)>>(&mut self, iter: I) {
        for (v, u) in iter {
            self.insert(v, u);
        }
    }
}

/// Options for [`sample_negative_edges`].
#[derive(Debug, Clone, Copy, Default)]
pub struct NegativeSampling {
    /// Only accept pairs whose hop distance is at least this (unreachable
    /// pairs always qualify). `None` disables the filter.
    pub min_distance: Option<usize>,
}

/// Samples `count` distinct unordered non-edges uniformly by rejection.
///
/// Pairs in `exclusion` are rejected as well. Fails after `100 * count`
/// draws without filling the request.
pub fn sample_negative_edges<R: Rng + ?Sized>(
    g: &Graph,
    count: usize,
    rng: &mut R,
    exclusion: &EdgeSet,
    options: NegativeSampling,
) -> Result<Vec<(NodeId, NodeId)>> {
    let n = g.node_count();
    let fail = |found: usize, attempts: usize| {
        let possible = (n * n.saturating_sub(1) / 2).max(1);
        Error::Sampling {
            requested: count,
            found,
            attempts,
            nodes: n,
            edges: g.edge_count(),
            density: g.edge_count() as f64 / possible as f64,
        }
    };
    if count == 0 {
        return Ok(Vec::new());
    }
    if n < 2 || g.non_edge_count() < count {
        return Err(fail(0, 0));
    }
    let budget = 100 * count;
    let mut taken = EdgeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == budget {
            return Err(fail(out.len(), attempts));
        }
        attempts += 1;
        let a = rng.gen_range(0..n) as NodeId;
        let b = rng.gen_range(0..n) as NodeId;
        if a == b {
            continue;
        }
        let (v, u) = (a.min(b), a.max(b));
        if g.has_edge(v, u) || exclusion.contains(v, u) || taken.contains(v, u) {
            continue;
        }
        if let Some(min) = options.min_distance {
            let cap = min.saturating_sub(1);
            if bfs_distance(g, v, u, cap).is_some() {
                continue;
            }
        }
        taken.insert(v, u);
        out.push((v, u));
    }
    Ok(out)
}
