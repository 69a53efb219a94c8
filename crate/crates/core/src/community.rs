//! Unsigned projection, Louvain community detection and Newman modularity.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::graph::{NodeId, SignedDigraph};
use crate::hash::{map_with_capacity, FxHashMap};
use crate::rng::{stream_rng, Stream};

/// Undirected weighted graph. `adj[u]` holds `(v, w)` for every neighbor; a
/// self-loop appears once in its own list and adds `2w` to the degree.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    total_weight: f64,
}

impl WeightedGraph {
    /// Builds from undirected edges; repeated pairs accumulate weight.
    pub fn from_edges(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: FxHashMap<(usize, usize), f64> = map_with_capacity(0);
        for (u, v, w) in edges {
            let key = if u <= v { (u, v) } else { (v, u) };
            *acc.entry(key).or_insert(0.0) += w;
        }
        let mut pairs: Vec<_> = acc.into_iter().collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let mut adj = alloc::vec![Vec::new(); num_nodes];
        let mut degree = alloc::vec![0.0; num_nodes];
        let mut total_weight = 0.0;
        for ((u, v), w) in pairs {
            total_weight += w;
            if u == v {
                adj[u].push((u, w));
                degree[u] += 2.0 * w;
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
                degree[u] += w;
                degree[v] += w;
            }
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Self { adj, degree, total_weight }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.degree[u]
    }

    /// Sum of edge weights `m` (self-loops once).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        match self.adj[u].binary_search_by_key(&v, |&(x, _)| x) {
            Ok(i) => self.adj[u][i].1,
            Err(_) => 0.0,
        }
    }

    /// Undirected edges `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&(v, _)| v >= u).map(move |&(v, w)| (u, v, w)))
    }
}

/// Signs and directions dropped: `{u, v}` is present iff some directed edge
/// joins `u` and `v` in any of the three edge sets; its weight counts those
/// directed edges (1 or 2).
pub fn unsigned_projection(g: &SignedDigraph) -> WeightedGraph {
    WeightedGraph::from_edges(
        g.num_nodes(),
        g.edges().map(|(e, _)| (e.src as usize, e.dst as usize, 1.0)),
    )
}

/// Total node → community map with dense community ids `0..k`.
///
/// Ids are canonical: communities are numbered in order of their smallest
/// member, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    assignment: Vec<u32>,
    num_communities: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary labeling.
    pub fn from_labels<L: Copy + Eq + core::hash::Hash>(labels: &[L]) -> Self {
        let mut ids: FxHashMap<L, u32> = map_with_capacity(labels.len());
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Self { assignment, num_communities: ids.len() }
    }

    pub fn singletons(num_nodes: usize) -> Self {
        Self { assignment: (0..num_nodes as u32).collect(), num_communities: num_nodes }
    }

    pub fn community(&self, node: NodeId) -> u32 {
        self.assignment[node as usize]
    }

    pub fn same_community(&self, a: NodeId, b: NodeId) -> bool {
        self.community(a) == self.community(b)
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn num_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.num_communities];
        for &c in &self.assignment {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

/// `Q = (1/2m) Σ_uv [A_uv − k_u k_v / 2m] δ(c_u, c_v)`; 0 for a graph without edges.
pub fn modularity(g: &WeightedGraph, p: &Partition) -> f64 {
    modularity_with_resolution(g, p.assignment(), p.num_communities(), 1.0)
}

fn modularity_with_resolution(g: &WeightedGraph, assignment: &[u32], k: usize, resolution: f64) -> f64 {
    let two_m = 2.0 * g.total_weight();
    if two_m <= 0.0 {
        return 0.0;
    }
    let mut internal = alloc::vec![0.0; k];
    let mut total = alloc::vec![0.0; k];
    for u in 0..g.num_nodes() {
        let cu = assignment[u] as usize;
        total[cu] += g.degree(u);
        for &(v, w) in g.neighbors(u) {
            if assignment[v] as usize == cu {
                // A_uu = 2w for a self-loop; other pairs are visited from both ends.
                internal[cu] += if u == v { 2.0 * w } else { w };
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(&inner, &tot)| inner / two_m - resolution * (tot / two_m) * (tot / two_m))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LouvainConfig {
    pub seed: u64,
    pub resolution: f64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self { seed: 0, resolution: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LouvainResult {
    pub partition: Partition,
    pub modularity: f64,
    /// Modularity of the original graph after each pass (local moves plus
    /// aggregation), then after the final connectivity split.
    pub pass_modularity: Vec<f64>,
}

/// Two-phase Louvain.
///
/// Phase one visits nodes in a seeded random order and moves each to the
/// neighboring community with the largest gain (ties go to the lowest
/// community id) while some move strictly improves modularity. Phase two
/// collapses communities into nodes. Passes repeat until one makes no move.
/// Communities that end up disconnected are split into their components,
/// which can only raise modularity.
pub fn louvain(g: &WeightedGraph, config: LouvainConfig) -> LouvainResult {
    let n = g.num_nodes();
    let mut rng = stream_rng(config.seed, Stream::Louvain);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level = g.clone();
    let mut pass_modularity = Vec::new();

    loop {
        let (moved, local) = local_moves(&level, config.resolution, &mut rng);
        if !moved {
            break;
        }
        let (dense, k) = densify(&local);
        for m in membership.iter_mut() {
            *m = dense[*m];
        }
        let q = modularity_with_resolution(g, &to_u32(&membership), k, config.resolution);
        debug_assert!(pass_modularity.last().is_none_or(|&prev| q >= prev - 1e-12));
        pass_modularity.push(q);
        level = aggregate(&level, &dense, k);
    }

    let partition = split_disconnected(g, &membership);
    let q = modularity_with_resolution(g, partition.assignment(), partition.num_communities(), config.resolution);
    debug_assert!(pass_modularity.last().is_none_or(|&prev| q >= prev - 1e-12));
    pass_modularity.push(q);
    LouvainResult { modularity: modularity(g, &partition), partition, pass_modularity }
}

fn to_u32(xs: &[usize]) -> Vec<u32> {
    xs.iter().map(|&x| x as u32).collect()
}

fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map: FxHashMap<usize, usize> = map_with_capacity(labels.len());
    let dense = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

fn local_moves<R: rand::Rng>(g: &WeightedGraph, resolution: f64, rng: &mut R) -> (bool, Vec<usize>) {
    let n = g.num_nodes();
    let mut community: Vec<usize> = (0..n).collect();
    let two_m = 2.0 * g.total_weight();
    if two_m <= 0.0 {
        return (false, community);
    }
    let mut tot: Vec<f64> = (0..n).map(|u| g.degree(u)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    // Scratch map community → weight from the current node.
    let mut link = alloc::vec![0.0; n];
    let mut seen = alloc::vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut improved = false;
        for &u in &order {
            let ku = g.degree(u);
            let own = community[u];
            touched.clear();
            for &(v, w) in g.neighbors(u) {
                if v == u {
                    continue;
                }
                let c = community[v];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[own] -= ku;
            let gain = |c: usize| link[c] - resolution * tot[c] * ku / two_m;
            let own_gain = gain(own);
            let mut best = own;
            let mut best_gain = own_gain;
            for &c in &touched {
                if c == own {
                    continue;
                }
                let gc = gain(c);
                let better = if best == own {
                    gc > own_gain + 1e-12
                } else {
                    gc > best_gain + 1e-12 || (fabs_eq(gc, best_gain) && c < best)
                };
                if better {
                    best = c;
                    best_gain = gc;
                }
            }
            tot[best] += ku;
            if best != own {
                community[u] = best;
                improved = true;
                any_move = true;
            }
            for &c in &touched {
                link[c] = 0.0;
                seen[c] = false;
            }
        }
        if !improved {
            break;
        }
    }
    (any_move, community)
}

fn fabs_eq(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= 1e-12
}

fn aggregate(g: &WeightedGraph, dense: &[usize], k: usize) -> WeightedGraph {
    WeightedGraph::from_edges(k, g.edges().map(|(u, v, w)| (dense[u], dense[v], w)))
}

/// Splits every community into the connected components of its induced subgraph.
fn split_disconnected(g: &WeightedGraph, membership: &[usize]) -> Partition {
    let n = g.num_nodes();
    let mut component = alloc::vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = next;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &(v, _) in g.neighbors(u) {
                if component[v] == usize::MAX && membership[v] == membership[start] {
                    component[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    Partition::from_labels(&component)
}
