use crate::graph::{EdgeLabel, NodeId, SignedDigraph};

/// Ordered triple `(u, v, w)` with edges `(u, v)`, `(v, w)` and the closing
/// chord `(u, w)`. `labels` follows that edge order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TransitiveTriad {
    pub u: NodeId,
    pub v: NodeId,
    pub w: NodeId,
    pub labels: [EdgeLabel; 3],
}

impl TransitiveTriad {
    pub fn unlabeled_count(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_labeled()).count()
    }
}

/// Wedge-then-check enumeration: for each middle node `v`, every in-neighbor
/// `u` and out-neighbor `w` with `u != w` forms a wedge, kept when `(u, w)`
/// exists. Each transitive triple is produced exactly once, in O(Σ_v d_in(v)·d_out(v)).
pub struct TransitiveTriads<'g> {
    g: &'g SignedDigraph,
    v: usize,
    i: usize,
    j: usize,
}

pub fn enumerate_transitive_triads(g: &SignedDigraph) -> TransitiveTriads<'_> {
    TransitiveTriads { g, v: 0, i: 0, j: 0 }
}

impl Iterator for TransitiveTriads<'_> {
    type Item = TransitiveTriad;

    fn next(&mut self) -> Option<TransitiveTriad> {
        let g = self.g;
        while self.v < g.num_nodes() {
            let v = self.v as NodeId;
            let ins = g.in_neighbors(v);
            let outs = g.out_neighbors(v);
            while self.i < ins.len() {
                let u = ins[self.i];
                while self.j < outs.len() {
                    let w = outs[self.j];
                    self.j += 1;
                    if u == w {
                        continue;
                    }
                    if let Some(chord) = g.label(u, w) {
                        let uv = g.label(u, v).expect("in-neighbor edge");
                        let vw = g.label(v, w).expect("out-neighbor edge");
                        return Some(TransitiveTriad { u, v, w, labels: [uv, vw, chord] });
                    }
                }
                self.i += 1;
                self.j = 0;
            }
            self.v += 1;
            self.i = 0;
            self.j = 0;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> SignedDigraph {
        SignedDigraph::new(n, edges.iter().map(|&(a, b)| (Edge::new(a, b), EdgeLabel::Positive))).unwrap()
    }

    #[test]
    fn single_transitive_triad() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let t: Vec<_> = enumerate_transitive_triads(&g).collect();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].u, t[0].v, t[0].w), (0, 1, 2));
    }

    #[test]
    fn directed_cycle_has_no_triads() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(enumerate_transitive_triads(&g).count(), 0);
    }

    fn brute_force(g: &SignedDigraph) -> usize {
        let n = g.num_nodes() as u32;
        let mut count = 0;
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if u != v && v != w && u != w && g.has_edge(u, v) && g.has_edge(v, w) && g.has_edge(u, w) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn complete_bidirected_triangle_has_six() {
        let g = graph(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]);
        assert_eq!(brute_force(&g), 6);
        assert_eq!(enumerate_transitive_triads(&g).count(), 6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_brute_force(n in 3u32..9, mask in proptest::collection::vec(any::<bool>(), 72)) {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        if mask[k % mask.len()] {
                            edges.push((a, b));
                        }
                        k += 1;
                    }
                }
            }
            let g = graph(n as usize, &edges);
            let triads: Vec<_> = enumerate_transitive_triads(&g).collect();
            prop_assert_eq!(triads.len(), brute_force(&g));
            let mut keys: Vec<_> = triads.iter().map(|t| (t.u, t.v, t.w)).collect();
            keys.sort_unstable();
            keys.dedup();
            prop_assert_eq!(keys.len(), triads.len());
        }
    }
}
