//! Class/rank trait specifications and the trait-updater hooks.
//!
//! Class traits carry an unordered finite set of values. Rank traits carry
//! totally ordered values, but only their relative ranks inside a subgraph
//! ever reach a transition label.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::graph::{Graph, GraphChange, NodeId};
use crate::io::Bucket;

/// Index of a registered trait within its scope (node or edge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraitId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitScope {
    Node,
    Edge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitKind {
    Class { values: Vec<String> },
    Rank,
}

/// A stored trait value. Class values index into the spec's value list.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TraitValue {
    Class(u16),
    Rank(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraitSpec {
    pub name: String,
    pub kind: TraitKind,
    pub scope: TraitScope,
    /// Value reported for nodes/edges with nothing stored.
    pub default: Option<TraitValue>,
}

impl TraitSpec {
    pub fn class(scope: TraitScope, name: &str, values: &[&str]) -> Self {
        TraitSpec {
            name: name.to_string(),
            kind: TraitKind::Class {
                values: values.iter().map(|v| v.to_string()).collect(),
            },
            scope,
            default: None,
        }
    }

    pub fn node_class(name: &str, values: &[&str]) -> Self {
        Self::class(TraitScope::Node, name, values)
    }

    pub fn edge_class(name: &str, values: &[&str]) -> Self {
        Self::class(TraitScope::Edge, name, values)
    }

    pub fn rank(scope: TraitScope, name: &str) -> Self {
        TraitSpec {
            name: name.to_string(),
            kind: TraitKind::Rank,
            scope,
            default: None,
        }
    }

    pub fn with_default(mut self, value: TraitValue) -> Self {
        self.default = Some(value);
        self
    }

    pub fn is_rank(&self) -> bool {
        matches!(self.kind, TraitKind::Rank)
    }

    /// Name of a class value; `None` for rank traits or out-of-range indices.
    pub fn class_name(&self, index: u16) -> Option<&str> {
        match &self.kind {
            TraitKind::Class { values } => values.get(index as usize).map(String::as_str),
            TraitKind::Rank => None,
        }
    }

    pub fn class_index(&self, name: &str) -> Option<u16> {
        match &self.kind {
            TraitKind::Class { values } => values.iter().position(|v| v == name).map(|i| i as u16),
            TraitKind::Rank => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !is_label_token(&self.name) {
            return Err(invalid_arg(format!("bad trait name {:?}", self.name)));
        }
        if let TraitKind::Class { values } = &self.kind {
            if values.is_empty() || values.len() > u16::MAX as usize {
                return Err(invalid_arg(format!("trait {:?} needs 1..65535 values", self.name)));
            }
            for (i, v) in values.iter().enumerate() {
                if !is_label_token(v) || values[..i].contains(v) {
                    return Err(invalid_arg(format!(
                        "bad or duplicate class value {v:?} in trait {:?}",
                        self.name
                    )));
                }
            }
        }
        if let Some(d) = &self.default {
            self.check_value(d)?;
        }
        Ok(())
    }
}

/// Characters allowed in trait names and class values; they appear verbatim
/// inside label strings.
pub(crate) fn is_label_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'+' | b'.'))
}

/// Dense descending ranks: the largest value gets rank 1 and ties share a
/// rank, so `<30, 4, 12, 4>` becomes `<1, 3, 2, 3>`.
pub fn rank_projection<T: PartialOrd>(values: &[T]) -> Result<Vec<u32>> {
    if values.is_empty() {
        return Err(invalid_arg("rank projection of an empty list"));
    }
    let mut order: Vec<&T> = values.iter().collect();
    let mut incomparable = false;
    order.sort_by(|a, b| {
        b.partial_cmp(a).unwrap_or_else(|| {
            incomparable = true;
            Ordering::Equal
        })
    });
    if incomparable || values.iter().any(|v| v.partial_cmp(v).is_none()) {
        return Err(invalid_arg("rank projection over incomparable values"));
    }
    order.dedup_by(|a, b| a == b);
    values
        .iter()
        .map(|v| {
            order
                .iter()
                .position(|d| *d == v)
                .map(|p| p as u32 + 1)
                .ok_or_else(|| invalid_arg("rank projection over incomparable values"))
        })
        .collect()
}

/// Per-change trait overrides. Counting reads through these instead of
/// mutating the shared graph.
#[derive(Clone, Debug, Default)]
pub struct TraitOverlay {
    nodes: Vec<(NodeId, TraitId, TraitValue)>,
    edges: Vec<((NodeId, NodeId), TraitId, TraitValue)>,
}

impl TraitOverlay {
    pub fn set_node(&mut self, v: NodeId, t: TraitId, value: TraitValue) {
        self.nodes.retain(|(n, id, _)| !(*n == v && *id == t));
        self.nodes.push((v, t, value));
    }

    /// `key` must already be normalized (see [`Graph::edge_key`]).
    pub fn set_edge(&mut self, key: (NodeId, NodeId), t: TraitId, value: TraitValue) {
        self.edges.retain(|(k, id, _)| !(*k == key && *id == t));
        self.edges.push((key, t, value));
    }

    pub fn node(&self, v: NodeId, t: TraitId) -> Option<TraitValue> {
        self.nodes.iter().find(|(n, id, _)| *n == v && *id == t).map(|e| e.2)
    }

    pub fn edge(&self, key: (NodeId, NodeId), t: TraitId) -> Option<TraitValue> {
        self.edges.iter().find(|(k, id, _)| *k == key && *id == t).map(|e| e.2)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.edges.clear();
    }
}

/// Points in the counting lifecycle at which updaters run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HookPhase {
    BeforeBatch,
    PreLabel,
    PostLabel,
    AfterBatch,
}

/// Mutable access to trait values only; topology stays read-only.
pub struct TraitWriter<'a> {
    graph: &'a mut Graph,
}

impl<'a> TraitWriter<'a> {
    pub fn new(graph: &'a mut Graph) -> Self {
        TraitWriter { graph }
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn set_node(&mut self, v: NodeId, t: TraitId, value: TraitValue) -> Result<()> {
        self.graph.set_node_trait(v, t, value)
    }

    pub fn set_edge(&mut self, u: NodeId, v: NodeId, t: TraitId, value: TraitValue) -> Result<()> {
        self.graph.set_edge_trait(u, v, t, value)
    }
}

/// A hook that rewrites trait values during counting. Batch phases may write
/// to the graph's trait store; per-change phases only see an overlay.
///
/// `hidden` is an edge that is present in `graph` but must be treated as
/// absent, which is how an existing edge is counted as a fresh addition.
pub trait TraitUpdater: Send + Sync {
    fn name(&self) -> &str;

    fn before_batch(&self, _writer: &mut TraitWriter<'_>) -> Result<()> {
        Ok(())
    }

    fn pre_label(
        &self,
        _graph: &Graph,
        _hidden: Option<(NodeId, NodeId)>,
        _change: &GraphChange,
        _overlay: &mut TraitOverlay,
    ) {
    }

    fn post_label(&self, _graph: &Graph, _change: &GraphChange) {}

    fn after_batch(&self, _writer: &mut TraitWriter<'_>) -> Result<()> {
        Ok(())
    }
}

/// Updaters in registration order.
#[derive(Default)]
pub struct UpdaterPipeline {
    updaters: Vec<Box<dyn TraitUpdater>>,
}

impl UpdaterPipeline {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, updater: Box<dyn TraitUpdater>) {
        self.updaters.push(updater);
    }

    pub fn names(&self) -> Vec<&str> {
        self.updaters.iter().map(|u| u.name()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.updaters.is_empty()
    }

    /// Runs a batch-level phase (`BeforeBatch` or `AfterBatch`).
    pub fn run_batch(&self, phase: HookPhase, graph: &mut Graph) -> Result<()> {
        let mut writer = TraitWriter::new(graph);
        for u in &self.updaters {
            match phase {
                HookPhase::BeforeBatch => u.before_batch(&mut writer)?,
                HookPhase::AfterBatch => u.after_batch(&mut writer)?,
                HookPhase::PreLabel | HookPhase::PostLabel => {
                    return Err(invalid_arg("per-change phase passed to run_batch"))
                }
            }
        }
        Ok(())
    }

    pub fn pre_label(
        &self,
        graph: &Graph,
        hidden: Option<(NodeId, NodeId)>,
        change: &GraphChange,
        overlay: &mut TraitOverlay,
    ) {
        for u in &self.updaters {
            u.pre_label(graph, hidden, change, overlay);
        }
    }

    pub fn post_label(&self, graph: &Graph, change: &GraphChange) {
        for u in &self.updaters {
            u.post_label(graph, change);
        }
    }
}

// ---- degree disambiguation -----------------------------------------------

pub const DEG_CMP: &str = "deg_cmp";
pub const DEG_NEUTRAL: u16 = 0;
pub const DEG_EQUAL: u16 = 1;
pub const DEG_HIGHER: u16 = 2;
pub const DEG_LESSER: u16 = 3;

/// Marks the endpoints of an undirected edge addition as equal/higher/lesser
/// degree so labels can tell the two endpoints apart. Every other node keeps
/// the neutral default.
pub struct DegreeDisambiguation {
    trait_id: TraitId,
}

impl DegreeDisambiguation {
    /// Registers the `deg_cmp` node trait (or reuses it) on `graph`.
    pub fn install(graph: &mut Graph) -> Result<Self> {
        let trait_id = match graph.find_trait(crate::traits::TraitScope::Node, DEG_CMP) {
            Some(id) => id,
            None => graph.register_trait(
                TraitSpec::node_class(DEG_CMP, &["neutral", "equal", "higher", "lesser"])
                    .with_default(TraitValue::Class(DEG_NEUTRAL)),
            )?,
        };
        Ok(DegreeDisambiguation { trait_id })
    }

    pub fn trait_id(&self) -> TraitId {
        self.trait_id
    }

    /// `deg_cmp` classes for `(u, v)` given their degrees.
    pub fn classes(deg_u: usize, deg_v: usize) -> (u16, u16) {
        match deg_u.cmp(&deg_v) {
            Ordering::Equal => (DEG_EQUAL, DEG_EQUAL),
            Ordering::Greater => (DEG_HIGHER, DEG_LESSER),
            Ordering::Less => (DEG_LESSER, DEG_HIGHER),
        }
    }
}

impl TraitUpdater for DegreeDisambiguation {
    fn name(&self) -> &str {
        "degree-disambiguation"
    }

    fn pre_label(
        &self,
        graph: &Graph,
        hidden: Option<(NodeId, NodeId)>,
        change: &GraphChange,
        overlay: &mut TraitOverlay,
    ) {
        let GraphChange::EdgeAddition { source, target, .. } = *change else {
            return;
        };
        if graph.is_directed() {
            return;
        }
        let degree = |x: NodeId| {
            let d = graph.degree(x);
            match hidden {
                Some((a, b)) if a == x || b == x => d - 1,
                _ => d,
            }
        };
        let (cu, cv) = Self::classes(degree(source), degree(target));
        overlay.set_node(source, self.trait_id, TraitValue::Class(cu));
        overlay.set_node(target, self.trait_id, TraitValue::Class(cv));
    }
}

// ---- temporal recency / frequency -----------------------------------------

pub const RECENCY: &str = "recency";
pub const FREQUENCY: &str = "frequency";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Recency {
    Never = 0,
    Newest = 1,
    New = 2,
    Old = 3,
}

impl Recency {
    pub const NAMES: [&'static str; 4] = ["never", "newest", "new", "old"];

    /// Category of an edge last seen in bucket `last` when predicting bucket
    /// `current`.
    pub fn classify(last: Option<usize>, current: usize) -> Recency {
        match last {
            None => Recency::Never,
            Some(b) => {
                debug_assert!(b < current, "history must precede the current bucket");
                match current - b {
                    1 => Recency::Newest,
                    2 => Recency::New,
                    _ => Recency::Old,
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frequency {
    Zero = 0,
    Once = 1,
    Twice = 2,
    ThreePlus = 3,
}

impl Frequency {
    pub const NAMES: [&'static str; 4] = ["0", "1", "2", "3+"];

    pub fn classify(prior_occurrences: usize) -> Frequency {
        match prior_occurrences {
            0 => Frequency::Zero,
            1 => Frequency::Once,
            2 => Frequency::Twice,
            _ => Frequency::ThreePlus,
        }
    }
}

/// Occurrence history of edges over the buckets strictly before `horizon`.
/// Buckets at or after the horizon are never read.
#[derive(Clone, Debug)]
pub struct EdgeHistory {
    directed: bool,
    horizon: usize,
    // edge key -> (last bucket seen, number of buckets seen in)
    seen: HashMap<(NodeId, NodeId), (usize, usize)>,
}

impl EdgeHistory {
    pub fn from_buckets(buckets: &[Bucket], horizon: usize, directed: bool) -> Result<Self> {
        if horizon > buckets.len() {
            return Err(invalid_arg(format!(
                "history horizon {horizon} beyond {} buckets",
                buckets.len()
            )));
        }
        let mut seen: HashMap<(NodeId, NodeId), (usize, usize)> = HashMap::new();
        for (b, bucket) in buckets[..horizon].iter().enumerate() {
            for e in &bucket.edges {
                let key = normalize(directed, e.source, e.target);
                let entry = seen.entry(key).or_insert((b, 0));
                entry.0 = b;
                entry.1 += 1;
            }
        }
        Ok(EdgeHistory {
            directed,
            horizon,
            seen,
        })
    }

    /// Index of the bucket being predicted.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn recency(&self, u: NodeId, v: NodeId) -> Recency {
        let last = self.seen.get(&normalize(self.directed, u, v)).map(|e| e.0);
        Recency::classify(last, self.horizon)
    }

    pub fn frequency(&self, u: NodeId, v: NodeId) -> Frequency {
        let count = self.seen.get(&normalize(self.directed, u, v)).map_or(0, |e| e.1);
        Frequency::classify(count)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.seen.keys().copied()
    }
}

fn normalize(directed: bool, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if directed || u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Maintains the `recency` and `frequency` edge class traits from an
/// [`EdgeHistory`]: every existing edge is tagged before the batch, and the
/// edge being added is tagged from its own history just before labeling.
pub struct TemporalTraits {
    history: EdgeHistory,
    recency: TraitId,
    frequency: TraitId,
}

impl TemporalTraits {
    pub fn install(graph: &mut Graph, history: EdgeHistory) -> Result<Self> {
        let recency = match graph.find_trait(TraitScope::Edge, RECENCY) {
            Some(id) => id,
            None => graph.register_trait(TraitSpec::edge_class(RECENCY, &Recency::NAMES))?,
        };
        let frequency = match graph.find_trait(TraitScope::Edge, FREQUENCY) {
            Some(id) => id,
            None => graph.register_trait(TraitSpec::edge_class(FREQUENCY, &Frequency::NAMES))?,
        };
        Ok(TemporalTraits {
            history,
            recency,
            frequency,
        })
    }

    pub fn history(&self) -> &EdgeHistory {
        &self.history
    }

    pub fn values_for(&self, u: NodeId, v: NodeId) -> [(TraitId, TraitValue); 2] {
        [
            (self.recency, TraitValue::Class(self.history.recency(u, v) as u16)),
            (self.frequency, TraitValue::Class(self.history.frequency(u, v) as u16)),
        ]
    }
}

impl TraitUpdater for TemporalTraits {
    fn name(&self) -> &str {
        "temporal-recency-frequency"
    }

    fn before_batch(&self, writer: &mut TraitWriter<'_>) -> Result<()> {
        let edges: Vec<_> = writer.graph().edges().collect();
        for (u, v) in edges {
            for (t, val) in self.values_for(u, v) {
                writer.set_edge(u, v, t, val)?;
            }
        }
        Ok(())
    }

    fn pre_label(
        &self,
        graph: &Graph,
        _hidden: Option<(NodeId, NodeId)>,
        change: &GraphChange,
        overlay: &mut TraitOverlay,
    ) {
        if let GraphChange::EdgeAddition { source, target, .. } = *change {
            let key = graph.edge_key(source, target);
            for (t, val) in self.values_for(source, target) {
                overlay.set_edge(key, t, val);
            }
        }
    }
}
