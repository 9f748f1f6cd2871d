//! Isomorphism-invariant labels for (subgraph, change) pairs.

mod canon;
mod label;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

pub use canon::{canonical_form, stable_coloring, CanonicalForm, ColoredGraph, Marked, MAX_NODES};
pub use label::{EdgeDescription, SstDescription, TokenValue, TraitToken};

use crate::error::{Result, SstError};
use crate::graph::{Graph, GraphChange, NodeId, NodeSet};
use crate::traits::{TraitId, TraitOverlay, TraitScope, TraitSpec, TraitValue};
use crate::view::ChangeView;

/// Dense id of an interned label string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelId(pub u32);

/// Thread-safe interner from canonical label strings to dense ids.
#[derive(Default)]
pub struct LabelRegistry {
    inner: Mutex<RegistryInner>,
}

#[derive(Default)]
struct RegistryInner {
    ids: HashMap<Arc<str>, LabelId>,
    strings: Vec<Arc<str>>,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&self, label: &str) -> LabelId {
        let mut inner = self.inner.lock().unwrap();
        if let Some(&id) = inner.ids.get(label) {
            return id;
        }
        let id = LabelId(inner.strings.len() as u32);
        let s: Arc<str> = Arc::from(label);
        inner.strings.push(s.clone());
        inner.ids.insert(s, id);
        id
    }

    pub fn get(&self, id: LabelId) -> Option<Arc<str>> {
        self.inner.lock().unwrap().strings.get(id.0 as usize).cloned()
    }

    pub fn id_of(&self, label: &str) -> Option<LabelId> {
        self.inner.lock().unwrap().ids.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A label id together with its canonical string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SstLabel {
    pub id: LabelId,
    pub canonical: Arc<str>,
}

impl SstLabel {
    pub fn describe(&self) -> Result<SstDescription> {
        SstDescription::parse(&self.canonical)
    }
}

static NEXT_LABELER: AtomicU64 = AtomicU64::new(1);

/// Memo from raw (pre-canonical) encodings to label ids.
///
/// A cache remembers which labeler filled it and silently resets when used
/// with a different one.
#[derive(Default)]
pub struct LabelCache {
    owner: u64,
    map: HashMap<Vec<u32>, LabelId>,
    hits: u64,
    misses: u64,
}

impl LabelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}

/// Turns (view, node set) pairs into label ids using a fixed selection of
/// traits.
pub struct TransitionLabeler {
    id: u64,
    directed: bool,
    node_traits: Vec<(TraitId, TraitSpec)>,
    edge_traits: Vec<(TraitId, TraitSpec)>,
}

impl TransitionLabeler {
    /// Labeler using every trait registered on `graph`.
    pub fn new(graph: &Graph) -> Self {
        let node = (0..graph.node_trait_specs().len()).map(TraitId).collect::<Vec<_>>();
        let edge = (0..graph.edge_trait_specs().len()).map(TraitId).collect::<Vec<_>>();
        Self::build(graph, &node, &edge)
    }

    /// Labeler using only the named traits; unknown names are an error.
    pub fn with_traits(graph: &Graph, names: &[&str]) -> Result<Self> {
        let mut node = Vec::new();
        let mut edge = Vec::new();
        for name in names {
            if let Some(t) = graph.find_trait(TraitScope::Node, name) {
                node.push(t);
            } else if let Some(t) = graph.find_trait(TraitScope::Edge, name) {
                edge.push(t);
            } else {
                return Err(SstError::InvalidArgument(format!("unknown trait {name:?}")));
            }
        }
        node.sort();
        node.dedup();
        edge.sort();
        edge.dedup();
        Ok(Self::build(graph, &node, &edge))
    }

    fn build(graph: &Graph, node: &[TraitId], edge: &[TraitId]) -> Self {
        TransitionLabeler {
            id: NEXT_LABELER.fetch_add(1, Ordering::Relaxed),
            directed: graph.is_directed(),
            node_traits: node
                .iter()
                .map(|&t| (t, graph.node_trait_specs()[t.0].clone()))
                .collect(),
            edge_traits: edge
                .iter()
                .map(|&t| (t, graph.edge_trait_specs()[t.0].clone()))
                .collect(),
        }
    }

    pub fn trait_names(&self) -> Vec<&str> {
        self.node_traits
            .iter()
            .chain(&self.edge_traits)
            .map(|(_, s)| s.name.as_str())
            .collect()
    }

    /// Label id of the subgraph induced by `s` in the view, with the changed
    /// element marked.
    pub fn label(
        &self,
        view: &ChangeView<'_>,
        s: &NodeSet,
        cache: &mut LabelCache,
        registry: &LabelRegistry,
    ) -> Result<LabelId> {
        if cache.owner != self.id {
            cache.map.clear();
            cache.owner = self.id;
        }
        let raw = self.raw(view, s)?;
        if let Some(&id) = cache.map.get(&raw.key) {
            cache.hits += 1;
            return Ok(id);
        }
        cache.misses += 1;
        let h = self.canonical(&raw)?;
        let id = registry.intern(&h);
        cache.map.insert(raw.key, id);
        Ok(id)
    }

    /// Canonical label string, bypassing caches and registries.
    pub fn label_string(&self, view: &ChangeView<'_>, s: &NodeSet) -> Result<String> {
        let raw = self.raw(view, s)?;
        self.canonical(&raw)
    }

    fn raw(&self, view: &ChangeView<'_>, s: &NodeSet) -> Result<RawTransition> {
        if view.is_directed() != self.directed {
            return Err(SstError::InvalidArgument(
                "labeler and graph disagree on directedness".into(),
            ));
        }
        let nodes = s.as_slice();
        let n = nodes.len();
        if n > MAX_NODES {
            return Err(SstError::UnsupportedSize {
                size: n,
                max: MAX_NODES,
            });
        }
        if n == 0 {
            return Err(SstError::InvalidContext("empty node set".into()));
        }
        let pos = |v: NodeId| nodes.binary_search(&v).ok();
        for &v in nodes {
            if !view.contains_node(v) {
                return Err(SstError::InvalidContext(format!("node {v} is not in the graph")));
            }
        }
        let marked = match view.change() {
            GraphChange::EdgeAddition { source, target, .. } | GraphChange::EdgeDeletion { source, target } => {
                match (pos(*source), pos(*target)) {
                    (Some(a), Some(b)) => Marked::Edge(a, b),
                    _ => return Err(SstError::InvalidContext("anchors missing from S".into())),
                }
            }
            GraphChange::NodeAddition { node, .. } | GraphChange::NodeDeletion { node } => match pos(*node) {
                Some(a) => Marked::Node(a),
                None => return Err(SstError::InvalidContext("anchor missing from S".into())),
            },
        };

        let mut arcs = Vec::new();
        let mut reach = [0u16; MAX_NODES];
        for i in 0..n {
            for j in 0..n {
                if i == j || (!self.directed && j < i) {
                    continue;
                }
                if view.has_arc(nodes[i], nodes[j]) {
                    arcs.push((i, j));
                    reach[i] |= 1 << j;
                    reach[j] |= 1 << i;
                }
            }
        }
        let mut seen: u16 = 1;
        let mut frontier: u16 = 1;
        while frontier != 0 {
            let mut next = 0;
            for (i, &r) in reach[..n].iter().enumerate() {
                if frontier & (1 << i) != 0 {
                    next |= r;
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        if seen.count_ones() as usize != n {
            return Err(SstError::InvalidContext("S is not connected".into()));
        }

        let mut node_codes = vec![Vec::with_capacity(self.node_traits.len()); n];
        for (t, spec) in &self.node_traits {
            let values: Vec<Option<TraitValue>> = nodes.iter().map(|&v| view.node_trait(v, *t)).collect();
            for (codes, c) in node_codes.iter_mut().zip(encode(spec, &values)) {
                codes.push(c);
            }
        }
        let mut arc_codes = vec![Vec::with_capacity(self.edge_traits.len()); arcs.len()];
        for (t, spec) in &self.edge_traits {
            let values: Vec<Option<TraitValue>> = arcs
                .iter()
                .map(|&(i, j)| view.edge_trait(nodes[i], nodes[j], *t))
                .collect();
            for (codes, c) in arc_codes.iter_mut().zip(encode(spec, &values)) {
                codes.push(c);
            }
        }

        let mut key = Vec::with_capacity(4 + n * (1 + self.node_traits.len()) + n * n);
        key.push(n as u32);
        match marked {
            Marked::Node(a) => key.extend([0, a as u32, 0]),
            Marked::Edge(a, b) => key.extend([1, a as u32, b as u32]),
        }
        for codes in &node_codes {
            key.extend_from_slice(codes);
        }
        let mut next_arc = 0;
        for i in 0..n {
            for j in 0..n {
                if i == j || (!self.directed && j < i) {
                    continue;
                }
                if next_arc < arcs.len() && arcs[next_arc] == (i, j) {
                    key.push(1);
                    key.extend_from_slice(&arc_codes[next_arc]);
                    next_arc += 1;
                } else {
                    key.push(0);
                }
            }
        }
        Ok(RawTransition {
            key,
            marked,
            node_codes,
            arcs: arcs.into_iter().zip(arc_codes).map(|((i, j), c)| (i, j, c)).collect(),
        })
    }

    fn canonical(&self, raw: &RawTransition) -> Result<String> {
        let cg = ColoredGraph::from_codes(
            self.directed,
            &raw.node_codes,
            &raw.arcs,
            raw.marked,
            |codes| render(&self.node_traits, codes, "."),
            |codes| render(&self.edge_traits, codes, ""),
        )?;
        let form = canonical_form(&cg);
        Ok(cg.serialize(&form.order))
    }
}

struct RawTransition {
    key: Vec<u32>,
    marked: Marked,
    node_codes: Vec<Vec<u32>>,
    arcs: Vec<(usize, usize, Vec<u32>)>,
}

/// Class values become `index + 1`, rank values their dense descending rank
/// among the present values; 0 means missing.
fn encode(spec: &TraitSpec, values: &[Option<TraitValue>]) -> Vec<u32> {
    if spec.is_rank() {
        let mut present: Vec<f64> = values
            .iter()
            .filter_map(|v| match v {
                Some(TraitValue::Rank(x)) if !x.is_nan() => Some(*x),
                _ => None,
            })
            .collect();
        present.sort_by(|a, b| b.partial_cmp(a).unwrap());
        present.dedup();
        values
            .iter()
            .map(|v| match v {
                Some(TraitValue::Rank(x)) if !x.is_nan() => present.iter().position(|p| p == x).unwrap() as u32 + 1,
                _ => 0,
            })
            .collect()
    } else {
        values
            .iter()
            .map(|v| match v {
                Some(TraitValue::Class(c)) => *c as u32 + 1,
                _ => 0,
            })
            .collect()
    }
}

fn render(traits: &[(TraitId, TraitSpec)], codes: &[u32], empty: &str) -> String {
    if traits.is_empty() {
        return empty.to_string();
    }
    let mut parts = Vec::with_capacity(traits.len());
    for ((_, spec), &c) in traits.iter().zip(codes) {
        let part = if spec.is_rank() {
            format!("{}#{}", spec.name, c)
        } else if c == 0 {
            format!("{}=?", spec.name)
        } else {
            let value = spec.class_name((c - 1) as u16).unwrap_or("?");
            format!("{}={}", spec.name, value)
        };
        parts.push(part);
    }
    parts.join("&")
}

/// Labels one transition using every trait registered on `graph`.
pub fn label_transition(
    graph: &Graph,
    s: &NodeSet,
    change: &GraphChange,
    registry: &LabelRegistry,
) -> Result<SstLabel> {
    let overlay = TraitOverlay::default();
    let view = ChangeView::new(graph, change, None, &overlay)?;
    let labeler = TransitionLabeler::new(graph);
    let h = labeler.label_string(&view, s)?;
    let id = registry.intern(&h);
    Ok(SstLabel {
        id,
        canonical: registry.get(id).expect("just interned"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(n: usize, edges: &[(NodeId, NodeId)]) -> Graph {
        Graph::from_edges(false, n, edges).unwrap()
    }

    #[test]
    fn triangle_closure_and_path_extension_differ() {
        let reg = LabelRegistry::new();
        let g = undirected(3, &[(0, 1), (1, 2)]);
        let s = NodeSet::new(vec![0, 1, 2]);
        let closing = label_transition(&g, &s, &GraphChange::add_edge(0, 2), &reg).unwrap();
        let g2 = undirected(3, &[(0, 1)]);
        let extending = label_transition(&g2, &s, &GraphChange::add_edge(1, 2), &reg).unwrap();
        assert_ne!(closing.id, extending.id);
        assert_eq!(reg.len(), 2);
    }

    #[test]
    fn relabeled_graphs_share_labels() {
        let reg = LabelRegistry::new();
        let g = undirected(4, &[(0, 1), (1, 2), (2, 3)]);
        let a = label_transition(&g, &NodeSet::new(vec![0, 1, 2, 3]), &GraphChange::add_edge(0, 3), &reg).unwrap();
        let h = undirected(4, &[(3, 2), (2, 1), (1, 0)]);
        let b = label_transition(&h, &NodeSet::new(vec![0, 1, 2, 3]), &GraphChange::add_edge(3, 0), &reg).unwrap();
        assert_eq!(a, b);
        let d = a.describe().unwrap();
        assert_eq!(d.edges.len(), 4);
        assert!((0..4).all(|v| d.out_degree(v) == 2));
    }

    #[test]
    fn disconnected_or_anchorless_sets_are_rejected() {
        let reg = LabelRegistry::new();
        let g = undirected(4, &[(0, 1), (2, 3)]);
        let err = label_transition(&g, &NodeSet::new(vec![0, 1, 2]), &GraphChange::add_edge(0, 1), &reg);
        assert!(matches!(err, Err(SstError::InvalidChange(_))));
        let err = label_transition(&g, &NodeSet::new(vec![0, 2, 3]), &GraphChange::delete_edge(0, 1), &reg);
        assert!(matches!(err, Err(SstError::InvalidContext(_))));
        let err = label_transition(&g, &NodeSet::new(vec![0, 1, 2]), &GraphChange::delete_edge(0, 1), &reg);
        assert!(matches!(err, Err(SstError::InvalidContext(_))));
    }

    #[test]
    fn oversized_sets_are_rejected() {
        let edges: Vec<(NodeId, NodeId)> = (0..9).map(|i| (i, i + 1)).collect();
        let g = undirected(10, &edges);
        let err = label_transition(
            &g,
            &NodeSet::new((0..10).collect()),
            &GraphChange::delete_edge(0, 1),
            &LabelRegistry::new(),
        );
        assert!(matches!(err, Err(SstError::UnsupportedSize { size: 10, max: 9 })));
    }

    #[test]
    fn rank_traits_only_contribute_relative_order() {
        let reg = LabelRegistry::new();
        let mut g = undirected(3, &[(0, 1), (1, 2)]);
        let t = g.register_trait(TraitSpec::rank(TraitScope::Node, "score")).unwrap();
        let s = NodeSet::new(vec![0, 1, 2]);
        let c = GraphChange::add_edge(0, 2);
        for (v, x) in [(0, 30.0), (1, 4.0), (2, 12.0)] {
            g.set_node_trait(v, t, TraitValue::Rank(x)).unwrap();
        }
        let a = label_transition(&g, &s, &c, &reg).unwrap();
        for (v, x) in [(0, 0.9), (1, 0.1), (2, 0.5)] {
            g.set_node_trait(v, t, TraitValue::Rank(x)).unwrap();
        }
        let b = label_transition(&g, &s, &c, &reg).unwrap();
        assert_eq!(a.id, b.id);
        g.set_node_trait(1, t, TraitValue::Rank(0.95)).unwrap();
        let c2 = label_transition(&g, &s, &c, &reg).unwrap();
        assert_ne!(a.id, c2.id);
    }

    #[test]
    fn cache_returns_the_same_ids() {
        let g = undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let overlay = TraitOverlay::default();
        let change = GraphChange::delete_edge(0, 1);
        let view = ChangeView::new(&g, &change, None, &overlay).unwrap();
        let labeler = TransitionLabeler::new(&g);
        let reg = LabelRegistry::new();
        let mut cache = LabelCache::new();
        let s = NodeSet::new(vec![0, 1, 2]);
        let a = labeler.label(&view, &s, &mut cache, &reg).unwrap();
        let b = labeler.label(&view, &s, &mut cache, &reg).unwrap();
        assert_eq!(a, b);
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
    }
}
