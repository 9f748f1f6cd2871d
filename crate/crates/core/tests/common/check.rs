//! Library-versus-oracle comparison shared by the oracle tests and the
//! acceptance gate.

use std::collections::BTreeMap;

use sst_core::counter::{count_transitions, enumerate_contexts, CounterConfig};
use sst_core::traits::TraitOverlay;
use sst_core::{ChangeView, Graph, GraphChange, LabelRegistry, NodeId, NodeSet, TransitionLabeler};

use super::{oracle_count, same_partition};

/// Compares `count_transitions` with the brute-force pipeline on one case.
pub fn check_case(g: &Graph, change: &GraphChange, k: usize) -> Result<(), String> {
    let oracle = oracle_count(g, change, k);
    let registry = LabelRegistry::new();
    let vector = count_transitions(g, change, &CounterConfig::new(k).unwrap(), &registry).map_err(|e| e.to_string())?;

    let overlay = TraitOverlay::default();
    let view = ChangeView::new(g, change, None, &overlay).map_err(|e| e.to_string())?;
    let mut found: Vec<Vec<NodeId>> = enumerate_contexts(&view, &change.anchors(), k)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|s| s.as_slice().to_vec())
        .collect();
    found.sort();
    let expected: Vec<Vec<NodeId>> = oracle.contexts.iter().map(|c| c.0.clone()).collect();
    if found != expected {
        return Err(format!(
            "contexts differ: {} found, {} expected",
            found.len(),
            expected.len()
        ));
    }

    let labeler = TransitionLabeler::new(g);
    let mut labels = Vec::new();
    let mut by_label: BTreeMap<String, u32> = BTreeMap::new();
    for (s, _) in &oracle.contexts {
        let h = labeler
            .label_string(&view, &NodeSet::new(s.clone()))
            .map_err(|e| e.to_string())?;
        *by_label.entry(h.clone()).or_insert(0) += 1;
        labels.push(h);
    }
    let keys: Vec<Vec<u32>> = oracle.contexts.iter().map(|c| c.1.clone()).collect();
    same_partition(&keys, &labels)?;

    let counted: BTreeMap<String, u32> = vector
        .entries
        .iter()
        .map(|(id, &c)| (registry.get(*id).unwrap().to_string(), c))
        .collect();
    if counted != by_label {
        return Err(format!("vector {counted:?} != oracle {by_label:?}"));
    }
    if vector.total != oracle.contexts.len() as u64 {
        return Err("total disagrees with the context count".into());
    }
    Ok(())
}
