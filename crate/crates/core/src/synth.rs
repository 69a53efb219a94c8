//! Planted-community signed digraphs for controlled experiments.

use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::graph::{Edge, NodeId, Sign, SignedDigraph, SignedEdge};
use crate::hash::set_with_capacity;
use crate::math::round;
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticConfig {
    pub num_nodes: usize,
    pub communities: usize,
    /// Out-edges drawn per node.
    pub out_degree: usize,
    /// Probability that a drawn target lies in the source's community.
    pub intra_prob: f64,
    /// Fraction of edges whose sign contradicts the community rule.
    pub violation: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { num_nodes: 400, communities: 2, out_degree: 10, intra_prob: 0.8, violation: 0.1, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticGraph {
    pub graph: SignedDigraph,
    /// Planted community of each node.
    pub community: Vec<u32>,
    /// Edges whose sign was flipped against the community rule.
    pub violations: Vec<Edge>,
}

/// Nodes are assigned round-robin to communities. Each node draws
/// `out_degree` distinct targets; an edge is positive inside a community and
/// negative across, after which exactly `round(violation·|E|)` signs are flipped.
pub fn planted_signed_graph(cfg: &SyntheticConfig) -> Result<SyntheticGraph> {
    let n = cfg.num_nodes;
    if cfg.communities == 0 || n < 2 * cfg.communities {
        return Err(Error::InvalidParameter("need at least two nodes per community"));
    }
    if !(0.0..=1.0).contains(&cfg.intra_prob) {
        return Err(Error::InvalidFraction { name: "intra_prob", value: cfg.intra_prob });
    }
    if !(0.0..=1.0).contains(&cfg.violation) {
        return Err(Error::InvalidFraction { name: "violation", value: cfg.violation });
    }
    let community: Vec<u32> = (0..n).map(|u| (u % cfg.communities) as u32).collect();
    let members: Vec<Vec<NodeId>> = (0..cfg.communities)
        .map(|c| (0..n).filter(|u| u % cfg.communities == c).map(|u| u as NodeId).collect())
        .collect();
    let max_intra = members.iter().map(Vec::len).min().unwrap_or(0) - 1;
    let max_inter = n - members.iter().map(Vec::len).max().unwrap_or(0);
    if cfg.out_degree > max_intra.min(max_inter) {
        return Err(Error::InvalidParameter("out_degree too large for the community sizes"));
    }

    let mut rng = stream_rng(cfg.seed, Stream::Synthetic);
    let mut seen = set_with_capacity::<u64>(n * cfg.out_degree);
    let mut edges: Vec<SignedEdge> = Vec::with_capacity(n * cfg.out_degree);
    for u in 0..n {
        let cu = community[u] as usize;
        let mut drawn = 0;
        while drawn < cfg.out_degree {
            let v = if rng.random_bool(cfg.intra_prob) {
                let m = &members[cu];
                m[rng.random_range(0..m.len())]
            } else {
                let mut c = rng.random_range(0..cfg.communities - 1);
                if c >= cu {
                    c += 1;
                }
                let m = &members[c];
                m[rng.random_range(0..m.len())]
            };
            let e = Edge::new(u as NodeId, v);
            if v as usize == u || !seen.insert(e.key()) {
                continue;
            }
            let sign = if community[v as usize] as usize == cu { Sign::Positive } else { Sign::Negative };
            edges.push(SignedEdge { edge: e, sign });
            drawn += 1;
        }
    }
    let flips = round(cfg.violation * edges.len() as f64) as usize;
    let mut violations: Vec<Edge> = Vec::with_capacity(flips);
    for i in index::sample(&mut rng, edges.len(), flips) {
        edges[i].sign = edges[i].sign.flipped();
        violations.push(edges[i].edge);
    }
    violations.sort_unstable();
    let graph = SignedDigraph::from_parts(n, &edges, &[])?;
    Ok(SyntheticGraph { graph, community, violations })
}
