mod common;

use common::check::check_case;
use common::*;
use proptest::prelude::*;
use sst_core::counter::{count_transitions, enumerate_contexts, CounterConfig};
use sst_core::{Graph, GraphChange, LabelRegistry, NodeId};

#[test]
fn er_twelve_contexts_match_subset_filter() {
    let mut r = rng(12);
    let g = gnp(12, 0.3, false, &mut r);
    let (u, v) = g.edges().next().unwrap();
    let found = enumerate_contexts(&g, &[u, v], 4).unwrap();
    let mut sorted: Vec<Vec<NodeId>> = found.iter().map(|s| s.as_slice().to_vec()).collect();
    sorted.sort();
    let expected = brute_contexts(&g, &[u, v], 4);
    assert_eq!(sorted, expected);
    assert_eq!(as_set(&sorted).len(), sorted.len(), "duplicate contexts");
}

#[test]
fn four_node_edge_addition_classes() {
    // every connected 4-node undirected graph with one marked edge
    let pairs: Vec<(NodeId, NodeId)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut oracle_classes = std::collections::BTreeSet::new();
    let mut labels = std::collections::BTreeSet::new();
    let registry = LabelRegistry::new();
    for mask in 0u32..64 {
        let edges: Vec<(NodeId, NodeId)> = (0..6).filter(|i| mask & (1 << i) != 0).map(|i| pairs[i]).collect();
        let after = Graph::from_edges(false, 4, &edges).unwrap();
        if !connected(&after, &[0, 1, 2, 3]) {
            continue;
        }
        for &(u, v) in &edges {
            let mut before = after.clone();
            before.remove_edge(u, v).unwrap();
            let change = GraphChange::add_edge(u, v);
            let o = oracle_count(&before, &change, 4);
            oracle_classes.extend(o.classes.keys().cloned());
            let vec = count_transitions(&before, &change, &CounterConfig::new(4).unwrap(), &registry).unwrap();
            labels.extend(vec.entries.keys().copied());
        }
    }
    assert_eq!(oracle_classes.len(), labels.len());
    // frozen from the oracle above
    assert_eq!(labels.len(), 10);
}

#[test]
fn binary_tree_leaf_attachments() {
    // parent -> child arcs; node ids follow the drawing order
    let arcs = [(0, 1), (1, 2), (2, 3), (2, 4), (0, 5), (5, 6), (5, 7), (7, 8), (7, 9)];
    let tree = Graph::from_edges(true, 10, &arcs).unwrap();
    let new = tree.node_count() as NodeId;
    // u hangs off node 1, w off leaf 4, v gives node 5 a third child
    let attach = |parent: NodeId| GraphChange::NodeAddition {
        node: new,
        edges: vec![(parent, new)],
        traits: Vec::new(),
    };
    let (u, v, w) = (attach(1), attach(5), attach(4));
    let registry = LabelRegistry::new();
    let cfg = CounterConfig::new(4).unwrap();
    let count = |c: &GraphChange| count_transitions(&tree, c, &cfg, &registry).unwrap().entries;
    let (cu, cv, cw) = (count(&u), count(&v), count(&w));
    assert_ne!(cv, cu);
    assert_ne!(cv, cw);
    for c in [&u, &v, &w] {
        check_case(&tree, c, 4).unwrap();
    }
}

#[test]
fn node_changes_match_oracle() {
    let mut r = rng(7);
    for case in 0..40 {
        let directed = case % 2 == 0;
        let mut g = gnp(8, 0.35, directed, &mut r);
        if case % 3 == 0 {
            decorate(&mut g, &mut r);
        }
        let victim = (case % 8) as NodeId;
        let k = 2 + case % 3;
        check_case(&g, &GraphChange::NodeDeletion { node: victim }, k).unwrap();
        let new = g.node_count() as NodeId;
        let edges = vec![(new, (case % 8) as NodeId), (((case + 3) % 8) as NodeId, new)];
        let add = GraphChange::NodeAddition {
            node: new,
            edges,
            traits: Vec::new(),
        };
        check_case(&g, &add, k).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn counts_match_brute_force(
        seed in any::<u64>(),
        n in 4usize..=10,
        p in 0.15f64..0.6,
        directed in any::<bool>(),
        traits in any::<bool>(),
        k in 2usize..=5,
    ) {
        let mut r = rng(seed);
        let mut g = gnp(n, p, directed, &mut r);
        if traits {
            decorate(&mut g, &mut r);
        }
        if let Some(change) = random_edge_change(&g, &mut r) {
            prop_assert!(check_case(&g, &change, k).is_ok(), "{:?}", check_case(&g, &change, k));
        }
    }

    #[test]
    fn enumeration_has_no_duplicates(seed in any::<u64>(), k in 2usize..=6) {
        let mut r = rng(seed);
        let g = gnp(11, 0.35, false, &mut r);
        let first = g.edges().next();
        if let Some((u, v)) = first {
            let found = enumerate_contexts(&g, &[u, v], k).unwrap();
            let set: std::collections::BTreeSet<_> = found.iter().map(|s| s.as_slice().to_vec()).collect();
            prop_assert_eq!(set.len(), found.len());
        }
    }
}
