//! Enumeration of the k-node contexts around a change and the resulting SST
//! count vectors.
//!
//! Contexts are enumerated by reverse search rooted at the anchor set: the
//! parent of a connected set `S` is `S` minus its largest-id vertex that is
//! neither an anchor nor a cut vertex of `S`. Every connected superset of
//! the anchors has exactly one parent chain, so each context is emitted once
//! and no visited set is stored.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::graph::{Graph, GraphChange, NodeId, NodeSet};
use crate::labeler::{LabelCache, LabelId, LabelRegistry, TransitionLabeler, MAX_NODES};
use crate::traits::{TraitOverlay, UpdaterPipeline};
use crate::view::ChangeView;

/// Undirected-skeleton adjacency, as seen by the enumerator.
pub trait Skeleton {
    /// Calls `f` for every skeleton neighbor of `x` (duplicates allowed).
    fn for_each_neighbor(&self, x: NodeId, f: &mut dyn FnMut(NodeId));
    fn adjacent(&self, a: NodeId, b: NodeId) -> bool;
    fn contains(&self, x: NodeId) -> bool;
}

impl Skeleton for Graph {
    fn for_each_neighbor(&self, x: NodeId, f: &mut dyn FnMut(NodeId)) {
        for y in self.skeleton_neighbors(x) {
            f(y);
        }
    }

    fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacent_skeleton(a, b)
    }

    fn contains(&self, x: NodeId) -> bool {
        self.contains_node(x)
    }
}

impl Skeleton for ChangeView<'_> {
    fn for_each_neighbor(&self, x: NodeId, f: &mut dyn FnMut(NodeId)) {
        ChangeView::for_each_neighbor(self, x, f)
    }

    fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacent_skeleton(a, b)
    }

    fn contains(&self, x: NodeId) -> bool {
        self.contains_node(x)
    }
}

/// Calls `emit` once for every `k`-node set containing `anchors` whose
/// induced skeleton is connected. Nodes are passed anchors first; sort them
/// if a canonical order is needed.
pub fn for_each_context<S: Skeleton + ?Sized>(
    graph: &S,
    anchors: &[NodeId],
    k: usize,
    emit: &mut dyn FnMut(&[NodeId]) -> Result<()>,
) -> Result<()> {
    if anchors.is_empty() || anchors.len() > 2 {
        return Err(invalid_arg("a change has one or two anchors"));
    }
    if k < anchors.len() {
        return Err(invalid_arg(format!(
            "k = {k} is smaller than the {} anchors",
            anchors.len()
        )));
    }
    if k > MAX_NODES {
        return Err(invalid_arg(format!("k = {k} exceeds {MAX_NODES}")));
    }
    for &a in anchors {
        if !graph.contains(a) {
            return Err(invalid_arg(format!("anchor {a} is not in the graph")));
        }
    }
    if anchors.len() == 2 && (anchors[0] == anchors[1] || !graph.adjacent(anchors[0], anchors[1])) {
        return Err(invalid_arg("two anchors must be distinct and adjacent"));
    }
    let mut search = ReverseSearch {
        graph,
        k,
        fixed: anchors.len(),
        nodes: anchors.to_vec(),
        masks: vec![0; anchors.len()],
        candidates: Vec::new(),
    };
    if anchors.len() == 2 {
        search.masks = vec![0b10, 0b01];
    }
    search.grow(emit)
}

/// Collects every context into a list of node sets.
pub fn enumerate_contexts<S: Skeleton + ?Sized>(graph: &S, anchors: &[NodeId], k: usize) -> Result<Vec<NodeSet>> {
    let mut out = Vec::new();
    for_each_context(graph, anchors, k, &mut |s| {
        out.push(NodeSet::new(s.to_vec()));
        Ok(())
    })?;
    Ok(out)
}

struct ReverseSearch<'a, S: ?Sized> {
    graph: &'a S,
    k: usize,
    fixed: usize,
    nodes: Vec<NodeId>,
    // bit j of masks[i]: nodes[i] and nodes[j] are adjacent
    masks: Vec<u16>,
    // candidate buffers, one per depth
    candidates: Vec<Vec<NodeId>>,
}

impl<S: Skeleton + ?Sized> ReverseSearch<'_, S> {
    fn grow(&mut self, emit: &mut dyn FnMut(&[NodeId]) -> Result<()>) -> Result<()> {
        if self.nodes.len() == self.k {
            return emit(&self.nodes);
        }
        let depth = self.nodes.len();
        let mut cand = if depth < self.candidates.len() {
            std::mem::take(&mut self.candidates[depth])
        } else {
            Vec::new()
        };
        cand.clear();
        for &x in &self.nodes {
            self.graph.for_each_neighbor(x, &mut |y| cand.push(y));
        }
        cand.sort_unstable();
        cand.dedup();
        cand.retain(|y| !self.nodes.contains(y));

        for &w in &cand {
            let n = self.nodes.len();
            let mut mask = 0u16;
            for (i, &x) in self.nodes.iter().enumerate() {
                if self.graph.adjacent(x, w) {
                    mask |= 1 << i;
                }
            }
            for (i, m) in self.masks.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    *m |= 1 << n;
                }
            }
            self.nodes.push(w);
            self.masks.push(mask);
            if self.is_canonical_child(w) {
                self.grow(emit)?;
            }
            self.nodes.pop();
            self.masks.pop();
            for m in self.masks.iter_mut() {
                *m &= !(1 << n);
            }
        }

        if self.candidates.len() <= depth {
            self.candidates.resize_with(depth + 1, Vec::new);
        }
        self.candidates[depth] = cand;
        Ok(())
    }

    /// `w` (just pushed) must be the largest non-anchor non-cut vertex, i.e.
    /// every larger non-anchor is a cut vertex of the extended set.
    fn is_canonical_child(&self, w: NodeId) -> bool {
        let n = self.nodes.len();
        (self.fixed..n - 1)
            .filter(|&i| self.nodes[i] > w)
            .all(|i| !connected_without(&self.masks, n, i))
    }
}

fn connected_without(masks: &[u16], n: usize, skip: usize) -> bool {
    let full: u16 = ((1u32 << n) - 1) as u16 & !(1 << skip);
    let start = if skip == 0 { 1 } else { 0 };
    let mut seen: u16 = 1 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let mut next = 0u16;
        for (i, &m) in masks.iter().enumerate() {
            if frontier & (1 << i) != 0 {
                next |= m;
            }
        }
        next &= full;
        frontier = next & !seen;
        seen |= next;
    }
    seen == full
}

/// Settings for counting: the context size and which traits enter labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterConfig {
    pub k: usize,
    /// Trait names to use; `None` selects every registered trait.
    pub traits: Option<Vec<String>>,
}

impl CounterConfig {
    pub fn new(k: usize) -> Result<Self> {
        let cfg = CounterConfig { k, traits: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_NODES).contains(&self.k) {
            return Err(invalid_arg(format!("k must be in 2..={MAX_NODES}, got {}", self.k)));
        }
        Ok(())
    }

    fn labeler(&self, graph: &Graph) -> Result<TransitionLabeler> {
        match &self.traits {
            None => Ok(TransitionLabeler::new(graph)),
            Some(names) => {
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                TransitionLabeler::with_traits(graph, &names)
            }
        }
    }
}

/// Sparse SST count vector of one change.
#[derive(Clone, Debug, PartialEq)]
pub struct SstVector {
    pub change: GraphChange,
    pub k: usize,
    pub entries: BTreeMap<LabelId, u32>,
    /// Number of contexts enumerated; equals the sum of the entries.
    pub total: u64,
}

#[derive(Serialize)]
struct VectorEntryJson<'a> {
    label_id: u32,
    #[serde(rename = "H")]
    h: &'a str,
    count: u32,
}

impl SstVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: LabelId) -> u32 {
        self.entries.get(&id).copied().unwrap_or(0)
    }

    /// Debug form `{change, k, entries: [{label_id, H, count}]}`.
    pub fn to_json(&self, registry: &LabelRegistry) -> serde_json::Value {
        let strings: Vec<_> = self
            .entries
            .keys()
            .map(|id| registry.get(*id).unwrap_or_else(|| "".into()))
            .collect();
        let entries: Vec<VectorEntryJson> = self
            .entries
            .iter()
            .zip(&strings)
            .map(|((id, count), h)| VectorEntryJson {
                label_id: id.0,
                h,
                count: *count,
            })
            .collect();
        serde_json::json!({
            "change": self.change,
            "k": self.k,
            "total": self.total,
            "entries": entries,
        })
    }
}

/// Counts the SSTs of `change` on the element-present view without
/// modifying `graph`.
pub fn count_view(
    labeler: &TransitionLabeler,
    view: &ChangeView<'_>,
    k: usize,
    cache: &mut LabelCache,
    registry: &LabelRegistry,
) -> Result<SstVector> {
    let anchors = view.change().anchors();
    let mut entries: BTreeMap<LabelId, u32> = BTreeMap::new();
    let mut total = 0u64;
    for_each_context(view, &anchors, k, &mut |s| {
        let id = labeler.label(view, &NodeSet::new(s.to_vec()), cache, registry)?;
        *entries.entry(id).or_insert(0) += 1;
        total += 1;
        Ok(())
    })?;
    Ok(SstVector {
        change: view.change().clone(),
        k,
        entries,
        total,
    })
}

/// One-shot counting with every selected trait and no updaters.
pub fn count_transitions(
    graph: &Graph,
    change: &GraphChange,
    cfg: &CounterConfig,
    registry: &LabelRegistry,
) -> Result<SstVector> {
    cfg.validate()?;
    let labeler = cfg.labeler(graph)?;
    let overlay = TraitOverlay::default();
    let view = ChangeView::new(graph, change, None, &overlay)?;
    count_view(&labeler, &view, cfg.k, &mut LabelCache::new(), registry)
}

/// A change to count, optionally treating an existing edge as absent first.
#[derive(Clone, Debug, PartialEq)]
pub struct CountJob {
    pub change: GraphChange,
    pub hidden: Option<(NodeId, NodeId)>,
}

impl CountJob {
    /// Count an existing edge as if it had just been added.
    pub fn existing_edge(u: NodeId, v: NodeId) -> Self {
        CountJob {
            change: GraphChange::add_edge(u, v),
            hidden: Some((u, v)),
        }
    }

    pub fn new_edge(u: NodeId, v: NodeId) -> Self {
        CountJob {
            change: GraphChange::add_edge(u, v),
            hidden: None,
        }
    }
}

/// Counter bound to one graph's trait registry and an updater pipeline.
///
/// Updaters must be installed on the graph before construction so their
/// traits are part of the labeler's selection.
pub struct TransitionCounter {
    labeler: TransitionLabeler,
    k: usize,
    pipeline: UpdaterPipeline,
}

impl TransitionCounter {
    pub fn new(graph: &Graph, cfg: &CounterConfig, pipeline: UpdaterPipeline) -> Result<Self> {
        cfg.validate()?;
        Ok(TransitionCounter {
            labeler: cfg.labeler(graph)?,
            k: cfg.k,
            pipeline,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pipeline(&self) -> &UpdaterPipeline {
        &self.pipeline
    }

    pub fn labeler(&self) -> &TransitionLabeler {
        &self.labeler
    }

    /// Runs the pre-label hooks, counts, then runs the post-label hooks.
    pub fn count(
        &self,
        graph: &Graph,
        job: &CountJob,
        cache: &mut LabelCache,
        registry: &LabelRegistry,
    ) -> Result<SstVector> {
        let mut overlay = TraitOverlay::default();
        self.pipeline.pre_label(graph, job.hidden, &job.change, &mut overlay);
        let view = ChangeView::new(graph, &job.change, job.hidden, &overlay)?;
        let v = count_view(&self.labeler, &view, self.k, cache, registry)?;
        self.pipeline.post_label(graph, &job.change);
        Ok(v)
    }

    /// Counts many jobs in parallel; output order matches `jobs`.
    pub fn count_all(&self, graph: &Graph, jobs: &[CountJob], registry: &LabelRegistry) -> Result<Vec<SstVector>> {
        jobs.par_iter()
            .map_init(LabelCache::new, |cache, job| self.count(graph, job, cache, registry))
            .collect()
    }
}
