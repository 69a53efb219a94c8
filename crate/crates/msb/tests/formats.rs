use std::io::Cursor;

use msb::io::{parse_edge_list, read_canonical, write_canonical, ValueFormat};
use msb_core::{Edge, EdgeLabel, SignedDigraph};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = SignedDigraph> {
    (2u32..30).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n, -1i8..=1), 0..80).prop_map(move |raw| {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<(Edge, EdgeLabel)> = raw
                .into_iter()
                .filter(|(u, v, _)| u != v && seen.insert((*u, *v)))
                .map(|(u, v, s)| (Edge::new(u, v), EdgeLabel::from_i8(s).unwrap()))
                .collect();
            SignedDigraph::new(n as usize, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn canonical_round_trip(g in graph_strategy()) {
        let mut buf = Vec::new();
        write_canonical(&g, &mut buf).unwrap();
        let back = read_canonical(Cursor::new(&buf)).unwrap();
        prop_assert_eq!(&back, &g);
        let mut again = Vec::new();
        write_canonical(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    /// Arbitrary string ids compact to `0..n` and map back to every record.
    #[test]
    fn id_compaction_is_a_bijection(
        records in proptest::collection::vec(("[a-z]{1,3}", "[a-z]{1,3}", prop_oneof![Just(-3i64), Just(2), Just(10)]), 1..60)
    ) {
        let text: String = records.iter().map(|(u, v, r)| format!("{u},{v},{r},0\n")).collect();
        let ing = parse_edge_list(Cursor::new(text), ValueFormat::Rating).unwrap();
        let ids: std::collections::HashSet<&String> = ing.id_map.iter().collect();
        prop_assert_eq!(ids.len(), ing.id_map.len());
        prop_assert_eq!(ing.graph.num_nodes(), ing.id_map.len());
        let mut last = std::collections::HashMap::new();
        for (u, v, r) in &records {
            if u != v {
                last.insert((u.clone(), v.clone()), *r);
            }
        }
        prop_assert_eq!(ing.graph.num_edges(), last.len());
        for ((u, v), r) in last {
            let iu = ing.id_map.iter().position(|s| *s == u).unwrap() as u32;
            let iv = ing.id_map.iter().position(|s| *s == v).unwrap() as u32;
            let want = if r > 0 { EdgeLabel::Positive } else { EdgeLabel::Negative };
            prop_assert_eq!(ing.graph.label(iu, iv), Some(want));
        }
    }
}

#[test]
fn whitespace_and_comma_inputs_agree() {
    let a = parse_edge_list(Cursor::new("7,3,5,1\n3,9,-2,2\n"), ValueFormat::Rating).unwrap();
    let b = parse_edge_list(Cursor::new("# header\n7 3 5\n\n3\t9 -2 2\n"), ValueFormat::Rating).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.id_map, vec!["7", "3", "9"]);
    assert_eq!(b.stats.comments, 1);
}
