mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use sst_core::counter::{count_transitions, CounterConfig};
use sst_core::{Graph, GraphChange, LabelRegistry, NodeId, TraitId, TraitValue};

fn counts(g: &Graph, change: &GraphChange, k: usize) -> BTreeMap<String, u32> {
    let registry = LabelRegistry::new();
    let v = count_transitions(g, change, &CounterConfig::new(k).unwrap(), &registry).unwrap();
    v.entries
        .iter()
        .map(|(id, &c)| (registry.get(*id).unwrap().to_string(), c))
        .collect()
}

/// Copy of `g` with node `v` renamed `perm[v]` and every rank value passed
/// through `rank_map`.
fn relabel(g: &Graph, perm: &[NodeId], rank_map: impl Fn(f64) -> f64) -> Graph {
    let n = g.node_count();
    let edges: Vec<(NodeId, NodeId)> = g.edges().map(|(u, v)| (perm[u as usize], perm[v as usize])).collect();
    let mut h = Graph::from_edges(g.is_directed(), n, &edges).unwrap();
    let map = |x: TraitValue| match x {
        TraitValue::Rank(r) => TraitValue::Rank(rank_map(r)),
        c => c,
    };
    for (t, spec) in g.node_trait_specs().iter().enumerate() {
        let id = h.register_trait(spec.clone()).unwrap();
        assert_eq!(id, TraitId(t));
        for v in g.nodes() {
            if let Some(x) = g.node_trait(v, id) {
                h.set_node_trait(perm[v as usize], id, map(x)).unwrap();
            }
        }
    }
    for (t, spec) in g.edge_trait_specs().iter().enumerate() {
        let id = h.register_trait(spec.clone()).unwrap();
        assert_eq!(id, TraitId(t));
        for (u, v) in g.edges() {
            if let Some(x) = g.edge_trait(u, v, id) {
                h.set_edge_trait(perm[u as usize], perm[v as usize], id, map(x))
                    .unwrap();
            }
        }
    }
    h
}

fn map_change(c: &GraphChange, perm: &[NodeId]) -> GraphChange {
    match c {
        GraphChange::EdgeAddition { source, target, traits } => GraphChange::EdgeAddition {
            source: perm[*source as usize],
            target: perm[*target as usize],
            traits: traits.clone(),
        },
        GraphChange::EdgeDeletion { source, target } => {
            GraphChange::delete_edge(perm[*source as usize], perm[*target as usize])
        }
        other => other.clone(),
    }
}

fn setup(seed: u64, directed: bool, traits: bool) -> Option<(Graph, GraphChange, rand_chacha::ChaCha8Rng)> {
    let mut r = rng(seed);
    let mut g = gnp(9, 0.35, directed, &mut r);
    if traits {
        decorate(&mut g, &mut r);
    }
    let change = random_edge_change(&g, &mut r)?;
    Some((g, change, r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn node_renaming_does_not_change_counts(
        seed in any::<u64>(), directed in any::<bool>(), traits in any::<bool>(), k in 2usize..=5,
    ) {
        if let Some((g, change, mut r)) = setup(seed, directed, traits) {
            let mut perm: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
            perm.shuffle(&mut r);
            let h = relabel(&g, &perm, |x| x);
            prop_assert_eq!(counts(&g, &change, k), counts(&h, &map_change(&change, &perm), k));
        }
    }

    #[test]
    fn monotone_rank_transforms_do_not_change_counts(
        seed in any::<u64>(), directed in any::<bool>(), k in 2usize..=5,
    ) {
        if let Some((g, change, _)) = setup(seed, directed, true) {
            let ident: Vec<NodeId> = (0..g.node_count() as NodeId).collect();
            let h = relabel(&g, &ident, |x| 10.0 * x * x * x + 5.0);
            prop_assert_eq!(counts(&g, &change, k), counts(&h, &change, k));
        }
    }

    #[test]
    fn undirected_addition_is_symmetric(seed in any::<u64>(), traits in any::<bool>(), k in 2usize..=5) {
        let mut r = rng(seed);
        let mut g = gnp(9, 0.35, false, &mut r);
        if traits {
            decorate(&mut g, &mut r);
        }
        let missing = (0..9).flat_map(|u| (u + 1..9).map(move |v| (u, v))).find(|&(u, v)| !g.has_edge(u, v));
        if let Some((u, v)) = missing {
            prop_assert_eq!(
                counts(&g, &GraphChange::add_edge(u, v), k),
                counts(&g, &GraphChange::add_edge(v, u), k)
            );
        }
    }

    #[test]
    fn adding_then_deleting_sees_the_same_contexts(
        seed in any::<u64>(), directed in any::<bool>(), k in 2usize..=5,
    ) {
        let mut r = rng(seed);
        let g = gnp(9, 0.3, directed, &mut r);
        let missing = (0..9u32)
            .flat_map(|u| (0..9u32).map(move |v| (u, v)))
            .find(|&(u, v)| u != v && !g.has_edge(u, v) && (directed || !g.has_edge(v, u)));
        if let Some((u, v)) = missing {
            let add = GraphChange::add_edge(u, v);
            let mut after = g.clone();
            let _ = after.apply_change(&add).unwrap();
            let del = GraphChange::delete_edge(u, v);
            // same (graph, marked edge) contexts, so the same labels
            prop_assert_eq!(counts(&g, &add, k), counts(&after, &del, k));
            let a = oracle_count(&g, &add, k);
            let d = oracle_count(&after, &del, k);
            prop_assert_eq!(a.classes, d.classes);
        }
    }
}
