use alloc::vec::Vec;

use crate::community::Partition;
use crate::graph::{Edge, Sign, SignedDigraph, SignedEdge};
use crate::hash::{map_with_capacity, FxHashMap};

use super::triads::enumerate_transitive_triads;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Provenance {
    Clean,
    MicroSb,
    MesoSb,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Clean => "clean",
            Provenance::MicroSb => "micro_sb",
            Provenance::MesoSb => "meso_sb",
        }
    }
}

/// One training unit. Clean samples always weigh 1; pseudo-labeled samples
/// get their weight from the reweighting step.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EdgeSample {
    pub edge: Edge,
    pub sign: Sign,
    pub provenance: Provenance,
    pub weight: f64,
}

impl EdgeSample {
    pub fn clean(e: SignedEdge) -> Self {
        Self { edge: e.edge, sign: e.sign, provenance: Provenance::Clean, weight: 1.0 }
    }

    pub fn pseudo(edge: Edge, sign: Sign, provenance: Provenance) -> Self {
        Self { edge, sign, provenance, weight: 1.0 }
    }

    pub fn signed_edge(&self) -> SignedEdge {
        SignedEdge { edge: self.edge, sign: self.sign }
    }
}

/// Microscale labels from triads with exactly one unlabeled edge.
///
/// Each such triad implies the sign that makes the product of its three signs
/// positive. Votes are aggregated per unlabeled edge by majority; ties are
/// dropped. Output follows the sorted unlabeled edge order.
pub fn micro_sb_label(g: &SignedDigraph) -> Vec<EdgeSample> {
    let mut votes: FxHashMap<Edge, (u32, u32)> = map_with_capacity(g.unlabeled_edges().len());
    for t in enumerate_transitive_triads(g) {
        if t.unlabeled_count() != 1 {
            continue;
        }
        let edges = [Edge::new(t.u, t.v), Edge::new(t.v, t.w), Edge::new(t.u, t.w)];
        let mut implied = Sign::Positive;
        let mut target = edges[0];
        for (e, l) in edges.iter().zip(t.labels) {
            match l.sign() {
                Some(s) => implied = implied * s,
                None => target = *e,
            }
        }
        let entry = votes.entry(target).or_insert((0, 0));
        match implied {
            Sign::Positive => entry.0 += 1,
            Sign::Negative => entry.1 += 1,
        }
    }
    g.unlabeled_edges()
        .iter()
        .filter_map(|e| {
            let &(pos, neg) = votes.get(e)?;
            let sign = match pos.cmp(&neg) {
                core::cmp::Ordering::Greater => Sign::Positive,
                core::cmp::Ordering::Less => Sign::Negative,
                core::cmp::Ordering::Equal => return None,
            };
            Some(EdgeSample::pseudo(*e, sign, Provenance::MicroSb))
        })
        .collect()
}

/// Mesoscale labels: positive inside a community, negative across.
pub fn meso_sb_label(unlabeled: &[Edge], partition: &Partition) -> Vec<EdgeSample> {
    unlabeled
        .iter()
        .map(|e| {
            let sign = if partition.same_community(e.src, e.dst) { Sign::Positive } else { Sign::Negative };
            EdgeSample::pseudo(*e, sign, Provenance::MesoSb)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SbMode {
    #[default]
    Both,
    MicroOnly,
    MesoOnly,
}

/// Concatenation filtered by `mode`. An edge labeled at both scales yields two
/// independent samples, possibly with opposite signs.
pub fn build_sb_set(micro: &[EdgeSample], meso: &[EdgeSample], mode: SbMode) -> Vec<EdgeSample> {
    let (use_micro, use_meso) = match mode {
        SbMode::Both => (true, true),
        SbMode::MicroOnly => (true, false),
        SbMode::MesoOnly => (false, true),
    };
    let mut out = Vec::with_capacity(micro.len() * use_micro as usize + meso.len() * use_meso as usize);
    if use_micro {
        out.extend_from_slice(micro);
    }
    if use_meso {
        out.extend_from_slice(meso);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeLabel;
    use alloc::vec;
    use proptest::prelude::*;

    fn e(a: u32, b: u32) -> Edge {
        Edge::new(a, b)
    }

    #[test]
    fn closing_signs_follow_the_product_rule() {
        use EdgeLabel::*;
        let g = SignedDigraph::new(3, vec![(e(0, 1), Positive), (e(1, 2), Positive), (e(0, 2), Unlabeled)]).unwrap();
        let s = micro_sb_label(&g);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].edge, s[0].sign), (e(0, 2), Sign::Positive));

        let g = SignedDigraph::new(3, vec![(e(0, 1), Positive), (e(1, 2), Unlabeled), (e(0, 2), Negative)]).unwrap();
        let s = micro_sb_label(&g);
        assert_eq!((s[0].edge, s[0].sign, s[0].provenance), (e(1, 2), Sign::Negative, Provenance::MicroSb));
    }

    #[test]
    fn ties_are_excluded() {
        use EdgeLabel::*;
        // (0,1) is the chord of four triads 0→k→1: two imply +, two imply −.
        let mut edges = vec![(e(0, 1), Unlabeled)];
        for (k, s) in [(2, Positive), (3, Positive), (4, Negative), (5, Negative)] {
            edges.push((e(0, k), Positive));
            edges.push((e(k, 1), s));
        }
        let g = SignedDigraph::new(6, edges.clone()).unwrap();
        assert!(micro_sb_label(&g).is_empty());
        // a fifth positive vote breaks the tie
        edges.push((e(0, 6), Positive));
        edges.push((e(6, 1), Positive));
        let g = SignedDigraph::new(7, edges).unwrap();
        let s = micro_sb_label(&g);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].sign, Sign::Positive);
    }

    #[test]
    fn meso_rule() {
        let p = Partition::from_labels(&[0, 0, 1]);
        let s = meso_sb_label(&[e(0, 1), e(1, 2)], &p);
        assert_eq!(s[0].sign, Sign::Positive);
        assert_eq!(s[1].sign, Sign::Negative);
        assert!(s.iter().all(|x| x.provenance == Provenance::MesoSb));
        assert!(meso_sb_label(&[], &p).is_empty());
    }

    #[test]
    fn sb_set_modes() {
        let micro = vec![EdgeSample::pseudo(e(0, 1), Sign::Positive, Provenance::MicroSb)];
        let meso = vec![
            EdgeSample::pseudo(e(0, 1), Sign::Negative, Provenance::MesoSb),
            EdgeSample::pseudo(e(2, 1), Sign::Negative, Provenance::MesoSb),
        ];
        let both = build_sb_set(&micro, &meso, SbMode::Both);
        assert_eq!(both.len(), 3);
        assert_eq!(both.iter().filter(|s| s.edge == e(0, 1)).count(), 2);
        assert_eq!(build_sb_set(&micro, &meso, SbMode::MicroOnly), micro);
        assert_eq!(build_sb_set(&micro, &meso, SbMode::MesoOnly), meso);
    }

    fn random_graph(n: u32, bits: &[u8]) -> SignedDigraph {
        let mut edges = Vec::new();
        let mut k = 0;
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let label = match bits[k % bits.len()] % 5 {
                    0 | 1 => None,
                    2 => Some(EdgeLabel::Positive),
                    3 => Some(EdgeLabel::Negative),
                    _ => Some(EdgeLabel::Unlabeled),
                };
                k += 1;
                if let Some(l) = label {
                    edges.push((e(a, b), l));
                }
            }
        }
        SignedDigraph::new(n as usize, edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn micro_labels_match_independent_recount(n in 3u32..8, bits in proptest::collection::vec(any::<u8>(), 56)) {
            let g = random_graph(n, &bits);
            let samples = micro_sb_label(&g);
            // Recount straight from node triples, independent of the enumerator.
            for s in &samples {
                let (mut pos, mut neg) = (0, 0);
                let sgn = |a: u32, b: u32| g.label(a, b).and_then(|l| l.sign());
                for x in 0..n {
                    if x == s.edge.src || x == s.edge.dst {
                        continue;
                    }
                    let (a, b) = (s.edge.src, s.edge.dst);
                    // edge as first leg (a,b),(b,x),(a,x); as second leg (x,a),(a,b),(x,b); as chord (a,x),(x,b),(a,b)
                    for (p, q) in [((b, x), (a, x)), ((x, a), (x, b)), ((a, x), (x, b))] {
                        if let (Some(s1), Some(s2)) = (sgn(p.0, p.1), sgn(q.0, q.1)) {
                            match s1 * s2 {
                                Sign::Positive => pos += 1,
                                Sign::Negative => neg += 1,
                            }
                        }
                    }
                }
                prop_assert!(pos != neg);
                prop_assert_eq!(s.sign, if pos > neg { Sign::Positive } else { Sign::Negative });
                prop_assert_eq!(g.label(s.edge.src, s.edge.dst), Some(EdgeLabel::Unlabeled));
            }
            let p = Partition::from_labels(&(0..n).map(|i| i % 2).collect::<Vec<_>>());
            let meso = meso_sb_label(g.unlabeled_edges(), &p);
            prop_assert_eq!(meso.len(), g.unlabeled_edges().len());
            prop_assert!(samples.len() <= meso.len());
        }
    }
}
