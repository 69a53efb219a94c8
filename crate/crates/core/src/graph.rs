//! Immutable signed directed graph.

use alloc::vec::Vec;
use core::ops::Mul;

use crate::hash::{map_with_capacity, FxHashMap};
use crate::{Error, Result};

pub type NodeId = u32;

/// Ordered node pair `(src, dst)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl Edge {
    pub const fn new(src: NodeId, dst: NodeId) -> Self {
        Self { src, dst }
    }

    pub(crate) const fn key(self) -> u64 {
        ((self.src as u64) << 32) | self.dst as u64
    }

    pub(crate) const fn from_key(key: u64) -> Self {
        Self::new((key >> 32) as NodeId, key as NodeId)
    }
}

impl From<(NodeId, NodeId)> for Edge {
    fn from((src, dst): (NodeId, NodeId)) -> Self {
        Self::new(src, dst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// +1.0 or -1.0.
    pub const fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    /// Binary cross-entropy target: 1 for positive, 0 for negative.
    pub const fn target(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => 0.0,
        }
    }

    pub const fn flipped(self) -> Self {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    pub const fn as_i8(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub const fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    /// Sign of a real rating; zero has no sign.
    pub fn from_rating(rating: i64) -> Option<Self> {
        match rating.signum() {
            1 => Some(Sign::Positive),
            -1 => Some(Sign::Negative),
            _ => None,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }
}

/// `+1` for a positive rating, `−1` for a negative one. Zero ratings carry no
/// sign and are rejected (`None`); callers drop and count them.
pub fn binarize_rating(rating: i64) -> Option<Sign> {
    Sign::from_rating(rating)
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

/// Label carried by an edge of a [`SignedDigraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EdgeLabel {
    Positive,
    Negative,
    Unlabeled,
}

impl EdgeLabel {
    pub const fn sign(self) -> Option<Sign> {
        match self {
            EdgeLabel::Positive => Some(Sign::Positive),
            EdgeLabel::Negative => Some(Sign::Negative),
            EdgeLabel::Unlabeled => None,
        }
    }

    pub const fn is_labeled(self) -> bool {
        !matches!(self, EdgeLabel::Unlabeled)
    }

    /// -1, 0 or +1 as in the canonical text format.
    pub const fn as_i8(self) -> i8 {
        match self {
            EdgeLabel::Positive => 1,
            EdgeLabel::Negative => -1,
            EdgeLabel::Unlabeled => 0,
        }
    }

    pub const fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(EdgeLabel::Positive),
            -1 => Some(EdgeLabel::Negative),
            0 => Some(EdgeLabel::Unlabeled),
            _ => None,
        }
    }
}

impl From<Sign> for EdgeLabel {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Positive => EdgeLabel::Positive,
            Sign::Negative => EdgeLabel::Negative,
        }
    }
}

impl From<Option<Sign>> for EdgeLabel {
    fn from(s: Option<Sign>) -> Self {
        s.map_or(EdgeLabel::Unlabeled, EdgeLabel::from)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedEdge {
    pub edge: Edge,
    pub sign: Sign,
}

impl SignedEdge {
    pub const fn new(src: NodeId, dst: NodeId, sign: Sign) -> Self {
        Self { edge: Edge::new(src, dst), sign }
    }
}

/// Compressed adjacency: neighbors of node `i` are `targets[offsets[i]..offsets[i + 1]]`,
/// sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Csr {
    fn build(num_nodes: usize, pairs: impl Iterator<Item = (NodeId, NodeId)> + Clone) -> Self {
        let mut offsets = alloc::vec![0usize; num_nodes + 1];
        for (a, _) in pairs.clone() {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = alloc::vec![0; offsets[num_nodes]];
        for (a, b) in pairs {
            targets[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
        }
        for i in 0..num_nodes {
            targets[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { offsets, targets }
    }

    fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Directed graph whose edges are positive, negative or unlabeled.
///
/// The three edge sets are disjoint, there are no self-loops and at most one
/// edge per ordered pair. Edge lists are kept sorted by `(src, dst)`.
#[derive(Clone, Debug)]
pub struct SignedDigraph {
    num_nodes: usize,
    positive: Vec<Edge>,
    negative: Vec<Edge>,
    unlabeled: Vec<Edge>,
    labels: FxHashMap<u64, EdgeLabel>,
    out_adj: Csr,
    in_adj: Csr,
}

impl PartialEq for SignedDigraph {
    fn eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes
            && self.positive == other.positive
            && self.negative == other.negative
            && self.unlabeled == other.unlabeled
    }
}

impl Eq for SignedDigraph {}

impl SignedDigraph {
    /// Strict constructor: rejects out-of-range endpoints, self-loops and
    /// repeated ordered pairs.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (Edge, EdgeLabel)>,
    ) -> Result<Self> {
        let iter = edges.into_iter();
        let mut labels = map_with_capacity(iter.size_hint().0);
        for (edge, label) in iter {
            for node in [edge.src, edge.dst] {
                if node as usize >= num_nodes {
                    return Err(Error::NodeOutOfRange { node: node as u64, num_nodes });
                }
            }
            if edge.src == edge.dst {
                return Err(Error::SelfLoop(edge.src));
            }
            if labels.insert(edge.key(), label).is_some() {
                return Err(Error::DuplicateEdge(edge.src, edge.dst));
            }
        }
        Ok(Self::from_label_map(num_nodes, labels))
    }

    /// Graph with the given labeled and unlabeled edge lists.
    pub fn from_parts(
        num_nodes: usize,
        labeled: &[SignedEdge],
        unlabeled: &[Edge],
    ) -> Result<Self> {
        Self::new(
            num_nodes,
            labeled
                .iter()
                .map(|e| (e.edge, EdgeLabel::from(e.sign)))
                .chain(unlabeled.iter().map(|&e| (e, EdgeLabel::Unlabeled))),
        )
    }

    fn from_label_map(num_nodes: usize, labels: FxHashMap<u64, EdgeLabel>) -> Self {
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut unlabeled = Vec::new();
        for (&key, &label) in &labels {
            let edge = Edge::from_key(key);
            match label {
                EdgeLabel::Positive => positive.push(edge),
                EdgeLabel::Negative => negative.push(edge),
                EdgeLabel::Unlabeled => unlabeled.push(edge),
            }
        }
        positive.sort_unstable();
        negative.sort_unstable();
        unlabeled.sort_unstable();
        let mut all: Vec<Edge> = labels.keys().map(|&k| Edge::from_key(k)).collect();
        all.sort_unstable();
        let out_adj = Csr::build(num_nodes, all.iter().map(|e| (e.src, e.dst)));
        let in_adj = Csr::build(num_nodes, all.iter().map(|e| (e.dst, e.src)));
        Self { num_nodes, positive, negative, unlabeled, labels, out_adj, in_adj }
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self::from_label_map(num_nodes, map_with_capacity(0))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.labels.len()
    }

    pub fn num_labeled(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn positive_edges(&self) -> &[Edge] {
        &self.positive
    }

    pub fn negative_edges(&self) -> &[Edge] {
        &self.negative
    }

    pub fn unlabeled_edges(&self) -> &[Edge] {
        &self.unlabeled
    }

    /// Label of `(src, dst)`, or `None` when the pair is not an edge.
    pub fn label(&self, src: NodeId, dst: NodeId) -> Option<EdgeLabel> {
        self.labels.get(&Edge::new(src, dst).key()).copied()
    }

    pub fn has_edge(&self, src: NodeId, dst: NodeId) -> bool {
        self.labels.contains_key(&Edge::new(src, dst).key())
    }

    pub fn out_neighbors(&self, node: NodeId) -> &[NodeId] {
        self.out_adj.neighbors(node)
    }

    pub fn in_neighbors(&self, node: NodeId) -> &[NodeId] {
        self.in_adj.neighbors(node)
    }

    /// Every edge with its label, sorted by `(src, dst)`.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, EdgeLabel)> + '_ {
        (0..self.num_nodes as NodeId).flat_map(move |u| {
            self.out_neighbors(u).iter().map(move |&v| {
                let e = Edge::new(u, v);
                (e, self.labels[&e.key()])
            })
        })
    }

    /// Positive and negative edges as signed edges, sorted by edge.
    pub fn labeled_edges(&self) -> Vec<SignedEdge> {
        let mut out: Vec<SignedEdge> = self
            .positive
            .iter()
            .map(|e| SignedEdge { edge: *e, sign: Sign::Positive })
            .chain(self.negative.iter().map(|e| SignedEdge { edge: *e, sign: Sign::Negative }))
            .collect();
        out.sort_unstable();
        out
    }

    /// Per-node `(out+, out-, in+, in-)` degree vectors.
    pub fn signed_degrees(&self) -> Vec<[u32; 4]> {
        let mut deg = alloc::vec![[0u32; 4]; self.num_nodes];
        for e in &self.positive {
            deg[e.src as usize][0] += 1;
            deg[e.dst as usize][2] += 1;
        }
        for e in &self.negative {
            deg[e.src as usize][1] += 1;
            deg[e.dst as usize][3] += 1;
        }
        deg
    }

    /// Checks disjointness of the edge sets and that both adjacency indexes
    /// agree with them.
    pub fn check_invariants(&self) -> bool {
        let total = self.positive.len() + self.negative.len() + self.unlabeled.len();
        if total != self.labels.len() {
            return false;
        }
        let sets = [
            (&self.positive, EdgeLabel::Positive),
            (&self.negative, EdgeLabel::Negative),
            (&self.unlabeled, EdgeLabel::Unlabeled),
        ];
        for (edges, label) in sets {
            for e in edges.iter() {
                if e.src == e.dst
                    || e.src as usize >= self.num_nodes
                    || e.dst as usize >= self.num_nodes
                    || self.labels.get(&e.key()) != Some(&label)
                {
                    return false;
                }
            }
        }
        let mut out_count = 0;
        let mut in_count = 0;
        for u in 0..self.num_nodes as NodeId {
            for &v in self.out_neighbors(u) {
                out_count += 1;
                if !self.has_edge(u, v) || self.in_neighbors(v).binary_search(&u).is_err() {
                    return false;
                }
            }
            in_count += self.in_neighbors(u).len();
        }
        out_count == total && in_count == total
    }
}

/// Counters reported by [`GraphBuilder`] for records it dropped or replaced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BuildStats {
    pub self_loops_dropped: usize,
    pub duplicates_replaced: usize,
}

/// Lenient accumulator used by ingestion: self-loops are dropped and counted,
/// a repeated ordered pair replaces the earlier record (last one wins).
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    num_nodes: usize,
    labels: FxHashMap<u64, EdgeLabel>,
    stats: BuildStats,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Makes sure the graph has at least `n` nodes (isolated ones included).
    pub fn reserve_nodes(&mut self, n: usize) {
        self.num_nodes = self.num_nodes.max(n);
    }

    pub fn insert(&mut self, src: NodeId, dst: NodeId, label: EdgeLabel) {
        self.reserve_nodes(src.max(dst) as usize + 1);
        if src == dst {
            self.stats.self_loops_dropped += 1;
            return;
        }
        if self.labels.insert(Edge::new(src, dst).key(), label).is_some() {
            self.stats.duplicates_replaced += 1;
        }
    }

    pub fn stats(&self) -> BuildStats {
        self.stats
    }

    pub fn build(self) -> (SignedDigraph, BuildStats) {
        (SignedDigraph::from_label_map(self.num_nodes, self.labels), self.stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_rating(5), Some(Sign::Positive));
        assert_eq!(binarize_rating(-3), Some(Sign::Negative));
        assert_eq!(binarize_rating(10), Some(Sign::Positive));
        assert_eq!(binarize_rating(-10), Some(Sign::Negative));
        assert_eq!(binarize_rating(0), None);
    }

    #[test]
    fn last_record_wins_on_duplicates() {
        let mut b = GraphBuilder::new();
        b.insert(0, 1, EdgeLabel::Positive);
        b.insert(1, 2, EdgeLabel::Negative);
        b.insert(0, 1, EdgeLabel::Negative);
        let (g, stats) = b.build();
        assert_eq!(g.num_nodes(), 3);
        assert!(g.positive_edges().is_empty());
        assert_eq!(g.negative_edges(), &[Edge::new(0, 1), Edge::new(1, 2)]);
        assert_eq!(stats.duplicates_replaced, 1);
        assert!(g.check_invariants());
    }

    #[test]
    fn self_loops_are_dropped_and_counted() {
        let mut b = GraphBuilder::new();
        b.insert(3, 3, EdgeLabel::Positive);
        b.insert(0, 1, EdgeLabel::Unlabeled);
        let (g, stats) = b.build();
        assert_eq!(g.num_nodes(), 4);
        assert_eq!(g.num_edges(), 1);
        assert_eq!(stats.self_loops_dropped, 1);
    }

    #[test]
    fn strict_constructor_rejects_bad_input() {
        let e = |a, b| (Edge::new(a, b), EdgeLabel::Positive);
        assert_eq!(SignedDigraph::new(2, vec![e(0, 0)]), Err(Error::SelfLoop(0)));
        assert!(matches!(
            SignedDigraph::new(2, vec![e(0, 2)]),
            Err(Error::NodeOutOfRange { node: 2, .. })
        ));
        assert_eq!(SignedDigraph::new(2, vec![e(0, 1), e(0, 1)]), Err(Error::DuplicateEdge(0, 1)));
    }

    #[test]
    fn adjacency_and_degrees() {
        let g = SignedDigraph::new(
            3,
            vec![
                (Edge::new(0, 1), EdgeLabel::Positive),
                (Edge::new(2, 1), EdgeLabel::Negative),
                (Edge::new(1, 0), EdgeLabel::Unlabeled),
            ],
        )
        .unwrap();
        assert_eq!(g.in_neighbors(1), &[0, 2]);
        assert_eq!(g.out_neighbors(1), &[0]);
        assert_eq!(g.label(2, 1), Some(EdgeLabel::Negative));
        assert_eq!(g.label(1, 2), None);
        let deg = g.signed_degrees();
        assert_eq!(deg[1], [0, 0, 1, 1]);
        assert_eq!(g.edges().count(), 3);
        assert!(g.check_invariants());
    }

    #[test]
    fn empty_graph() {
        let (g, _) = GraphBuilder::new().build();
        assert_eq!(g.num_nodes(), 0);
        assert_eq!(g.num_edges(), 0);
        assert!(g.check_invariants());
    }

    #[test]
    fn sign_algebra() {
        use Sign::*;
        assert_eq!(Positive * Positive, Positive);
        assert_eq!(Negative * Negative, Positive);
        assert_eq!(Positive * Negative, Negative);
        assert_eq!(Sign::from_rating(5), Some(Positive));
        assert_eq!(Sign::from_rating(-3), Some(Negative));
        assert_eq!(Sign::from_rating(10), Some(Positive));
        assert_eq!(Sign::from_rating(-10), Some(Negative));
        assert_eq!(Sign::from_rating(0), None);
    }
}
