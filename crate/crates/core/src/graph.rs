//! Simple directed/undirected graphs with trait stores and an undoable change API.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SstError};
use crate::traits::{TraitId, TraitKind, TraitScope, TraitSpec, TraitValue};

pub type NodeId = u32;

/// Sorted, duplicate-free set of node ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new(mut nodes: Vec<NodeId>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        NodeSet(nodes)
    }

    /// Builds a set and checks every member is a live node of `g`.
    pub fn in_graph(g: &Graph, nodes: Vec<NodeId>) -> Result<Self> {
        let set = NodeSet::new(nodes);
        if let Some(&bad) = set.0.iter().find(|&&v| !g.contains_node(v)) {
            return Err(invalid_arg(format!("node {bad} is not in the graph")));
        }
        Ok(set)
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// One local modification of a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphChange {
    EdgeAddition {
        source: NodeId,
        target: NodeId,
        traits: Vec<(TraitId, TraitValue)>,
    },
    EdgeDeletion {
        source: NodeId,
        target: NodeId,
    },
    /// A new node together with the edges it arrives with. Each edge is
    /// `(a, b)` with `node` as one of its endpoints.
    NodeAddition {
        node: NodeId,
        edges: Vec<(NodeId, NodeId)>,
        traits: Vec<(TraitId, TraitValue)>,
    },
    NodeDeletion {
        node: NodeId,
    },
}

impl GraphChange {
    pub fn add_edge(source: NodeId, target: NodeId) -> Self {
        GraphChange::EdgeAddition {
            source,
            target,
            traits: Vec::new(),
        }
    }

    pub fn delete_edge(source: NodeId, target: NodeId) -> Self {
        GraphChange::EdgeDeletion { source, target }
    }

    /// The one or two nodes every transition of this change must contain.
    pub fn anchors(&self) -> Vec<NodeId> {
        match *self {
            GraphChange::EdgeAddition { source, target, .. } | GraphChange::EdgeDeletion { source, target } => {
                vec![source, target]
            }
            GraphChange::NodeAddition { node, .. } | GraphChange::NodeDeletion { node } => {
                vec![node]
            }
        }
    }

    pub fn is_addition(&self) -> bool {
        matches!(
            self,
            GraphChange::EdgeAddition { .. } | GraphChange::NodeAddition { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GraphChange::EdgeAddition { .. } => "edge-addition",
            GraphChange::EdgeDeletion { .. } => "edge-deletion",
            GraphChange::NodeAddition { .. } => "node-addition",
            GraphChange::NodeDeletion { .. } => "node-deletion",
        }
    }
}

/// Undo record returned by [`Graph::apply_change`].
#[derive(Debug, Clone)]
#[must_use = "pass the record to revert_change to undo the change"]
pub struct AppliedChange(Undo);

#[derive(Debug, Clone)]
enum Undo {
    RemoveEdge(NodeId, NodeId),
    RestoreEdge(NodeId, NodeId, Vec<(TraitId, TraitValue)>),
    RemoveNode {
        node: NodeId,
        fresh_slot: bool,
    },
    RestoreNode {
        node: NodeId,
        node_traits: Vec<(TraitId, TraitValue)>,
        edges: Vec<(NodeId, NodeId, Vec<(TraitId, TraitValue)>)>,
    },
}

/// Which distance is used by [`Graph::within_k_hops`] on directed graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum HopMetric {
    /// Distance on the underlying undirected skeleton.
    #[default]
    Skeleton,
    /// Directed distance from the first to the second node of a pair.
    Directed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopPair {
    pub u: NodeId,
    pub v: NodeId,
    pub is_edge: bool,
}

/// A simple graph. Node ids are dense slot indices; deleted nodes leave a dead
/// slot behind so that ids stay stable.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    directed: bool,
    alive: Vec<bool>,
    live_nodes: usize,
    // sorted neighbor lists; `in_adj` is empty for undirected graphs
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    edge_count: usize,
    node_specs: Vec<TraitSpec>,
    edge_specs: Vec<TraitSpec>,
    node_values: Vec<HashMap<NodeId, TraitValue>>,
    edge_values: Vec<HashMap<(NodeId, NodeId), TraitValue>>,
}

impl Graph {
    pub fn new(directed: bool) -> Self {
        Graph {
            directed,
            alive: Vec::new(),
            live_nodes: 0,
            out_adj: Vec::new(),
            in_adj: Vec::new(),
            edge_count: 0,
            node_specs: Vec::new(),
            edge_specs: Vec::new(),
            node_values: Vec::new(),
            edge_values: Vec::new(),
        }
    }

    /// Graph with nodes `0..n` and no edges.
    pub fn with_nodes(directed: bool, n: usize) -> Self {
        let mut g = Graph::new(directed);
        g.ensure_nodes(n);
        g
    }

    pub fn from_edges(directed: bool, n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Graph::with_nodes(directed, n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of slots (live and dead); valid node ids are below this.
    pub fn slot_count(&self) -> usize {
        self.alive.len()
    }

    pub fn node_count(&self) -> usize {
        self.live_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        self.alive.get(v as usize).copied().unwrap_or(false)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i as NodeId)
    }

    /// Grows the slot array so that nodes `0..n` exist.
    pub fn ensure_nodes(&mut self, n: usize) {
        while self.alive.len() < n {
            self.push_node();
        }
    }

    pub fn push_node(&mut self) -> NodeId {
        let id = self.alive.len() as NodeId;
        self.alive.push(true);
        self.live_nodes += 1;
        self.out_adj.push(Vec::new());
        if self.directed {
            self.in_adj.push(Vec::new());
        }
        id
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj
            .get(u as usize)
            .is_some_and(|adj| adj.binary_search(&v).is_ok())
    }

    /// Out-neighbors (all neighbors when undirected).
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u as usize]
    }

    /// In-neighbors (all neighbors when undirected).
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        if self.directed {
            &self.in_adj[u as usize]
        } else {
            &self.out_adj[u as usize]
        }
    }

    /// Neighbors on the undirected skeleton; may repeat a node when a pair is
    /// connected in both directions.
    pub fn skeleton_neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let extra: &[NodeId] = if self.directed { &self.in_adj[u as usize] } else { &[] };
        self.out_adj[u as usize].iter().chain(extra.iter()).copied()
    }

    pub fn adjacent_skeleton(&self, u: NodeId, v: NodeId) -> bool {
        self.has_edge(u, v) || (self.directed && self.has_edge(v, u))
    }

    pub fn degree(&self, u: NodeId) -> usize {
        if self.directed {
            self.out_adj[u as usize].len() + self.in_adj[u as usize].len()
        } else {
            self.out_adj[u as usize].len()
        }
    }

    /// All edges, `(u, v)` with `u < v` when undirected, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        let directed = self.directed;
        self.out_adj.iter().enumerate().flat_map(move |(u, adj)| {
            let u = u as NodeId;
            adj.iter()
                .copied()
                .filter(move |&v| directed || u < v)
                .map(move |v| (u, v))
        })
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if self.contains_node(v) {
            Ok(())
        } else {
            Err(SstError::InvalidChange(format!("node {v} does not exist")))
        }
    }

    /// Inserts an edge; errors on self-loops, unknown nodes and duplicates.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(SstError::InvalidChange(format!("self-loop on {u}")));
        }
        if self.has_edge(u, v) {
            return Err(SstError::InvalidChange(format!("edge ({u}, {v}) already present")));
        }
        insert_sorted(&mut self.out_adj[u as usize], v);
        if self.directed {
            insert_sorted(&mut self.in_adj[v as usize], u);
        } else {
            insert_sorted(&mut self.out_adj[v as usize], u);
        }
        self.edge_count += 1;
        Ok(())
    }

    /// Removes an edge and returns the trait values it carried.
    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Result<Vec<(TraitId, TraitValue)>> {
        if !self.has_edge(u, v) {
            return Err(SstError::InvalidChange(format!("edge ({u}, {v}) is absent")));
        }
        remove_sorted(&mut self.out_adj[u as usize], v);
        if self.directed {
            remove_sorted(&mut self.in_adj[v as usize], u);
        } else {
            remove_sorted(&mut self.out_adj[v as usize], u);
        }
        self.edge_count -= 1;
        let key = self.edge_key(u, v);
        let mut traits = Vec::new();
        for (i, store) in self.edge_values.iter_mut().enumerate() {
            if let Some(val) = store.remove(&key) {
                traits.push((TraitId(i), val));
            }
        }
        Ok(traits)
    }

    pub(crate) fn edge_key(&self, u: NodeId, v: NodeId) -> (NodeId, NodeId) {
        if self.directed || u < v {
            (u, v)
        } else {
            (v, u)
        }
    }

    // ---- traits ----------------------------------------------------------

    /// Registers a trait and returns its id within its scope.
    pub fn register_trait(&mut self, spec: TraitSpec) -> Result<TraitId> {
        spec.validate()?;
        let (specs, id) = match spec.scope {
            TraitScope::Node => {
                self.node_values.push(HashMap::new());
                (&mut self.node_specs, self.node_values.len() - 1)
            }
            TraitScope::Edge => {
                self.edge_values.push(HashMap::new());
                (&mut self.edge_specs, self.edge_values.len() - 1)
            }
        };
        if specs.iter().any(|s| s.name == spec.name) {
            return Err(invalid_arg(format!("trait {:?} registered twice", spec.name)));
        }
        specs.push(spec);
        Ok(TraitId(id))
    }

    pub fn node_trait_specs(&self) -> &[TraitSpec] {
        &self.node_specs
    }

    pub fn edge_trait_specs(&self) -> &[TraitSpec] {
        &self.edge_specs
    }

    pub fn find_trait(&self, scope: TraitScope, name: &str) -> Option<TraitId> {
        let specs = match scope {
            TraitScope::Node => &self.node_specs,
            TraitScope::Edge => &self.edge_specs,
        };
        specs.iter().position(|s| s.name == name).map(TraitId)
    }

    pub fn set_node_trait(&mut self, v: NodeId, t: TraitId, value: TraitValue) -> Result<()> {
        self.check_node(v)?;
        let spec = self
            .node_specs
            .get(t.0)
            .ok_or_else(|| invalid_arg(format!("unknown node trait {}", t.0)))?;
        spec.check_value(&value)?;
        self.node_values[t.0].insert(v, value);
        Ok(())
    }

    pub fn set_edge_trait(&mut self, u: NodeId, v: NodeId, t: TraitId, value: TraitValue) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(invalid_arg(format!("edge ({u}, {v}) is absent")));
        }
        let spec = self
            .edge_specs
            .get(t.0)
            .ok_or_else(|| invalid_arg(format!("unknown edge trait {}", t.0)))?;
        spec.check_value(&value)?;
        let key = self.edge_key(u, v);
        self.edge_values[t.0].insert(key, value);
        Ok(())
    }

    /// Stored value, falling back to the spec default.
    pub fn node_trait(&self, v: NodeId, t: TraitId) -> Option<TraitValue> {
        self.node_values[t.0].get(&v).copied().or(self.node_specs[t.0].default)
    }

    pub fn edge_trait(&self, u: NodeId, v: NodeId, t: TraitId) -> Option<TraitValue> {
        self.edge_values[t.0]
            .get(&self.edge_key(u, v))
            .copied()
            .or(self.edge_specs[t.0].default)
    }

    fn node_traits_of(&self, v: NodeId) -> Vec<(TraitId, TraitValue)> {
        self.node_values
            .iter()
            .enumerate()
            .filter_map(|(i, store)| store.get(&v).map(|&val| (TraitId(i), val)))
            .collect()
    }

    fn set_edge_traits(&mut self, u: NodeId, v: NodeId, traits: &[(TraitId, TraitValue)]) -> Result<()> {
        for &(t, val) in traits {
            self.set_edge_trait(u, v, t, val)?;
        }
        Ok(())
    }

    // ---- changes ---------------------------------------------------------

    /// Checks that `c` can be applied to the current graph.
    pub fn validate_change(&self, c: &GraphChange) -> Result<()> {
        match c {
            GraphChange::EdgeAddition { source, target, traits } => {
                self.check_node(*source)?;
                self.check_node(*target)?;
                if source == target {
                    return Err(SstError::InvalidChange(format!("self-loop on {source}")));
                }
                if self.has_edge(*source, *target) {
                    return Err(SstError::InvalidChange(format!(
                        "edge ({source}, {target}) already present"
                    )));
                }
                self.check_traits(TraitScope::Edge, traits)
            }
            GraphChange::EdgeDeletion { source, target } => {
                if !self.has_edge(*source, *target) {
                    return Err(SstError::InvalidChange(format!("edge ({source}, {target}) is absent")));
                }
                Ok(())
            }
            GraphChange::NodeAddition { node, edges, traits } => {
                if self.contains_node(*node) {
                    return Err(SstError::InvalidChange(format!("node {node} already exists")));
                }
                if *node as usize > self.slot_count() {
                    return Err(SstError::InvalidChange(format!(
                        "node id {node} skips past the next free slot {}",
                        self.slot_count()
                    )));
                }
                let mut seen = Vec::with_capacity(edges.len());
                for &(a, b) in edges {
                    let other = if a == *node {
                        b
                    } else if b == *node {
                        a
                    } else {
                        return Err(SstError::InvalidChange(format!(
                            "edge ({a}, {b}) is not incident to new node {node}"
                        )));
                    };
                    if other == *node {
                        return Err(SstError::InvalidChange(format!("self-loop on {node}")));
                    }
                    self.check_node(other)?;
                    let key = if self.directed || a < b { (a, b) } else { (b, a) };
                    if seen.contains(&key) {
                        return Err(SstError::InvalidChange(format!("duplicate edge ({a}, {b})")));
                    }
                    seen.push(key);
                }
                self.check_traits(TraitScope::Node, traits)
            }
            GraphChange::NodeDeletion { node } => self.check_node(*node),
        }
    }

    fn check_traits(&self, scope: TraitScope, traits: &[(TraitId, TraitValue)]) -> Result<()> {
        let specs = match scope {
            TraitScope::Node => &self.node_specs,
            TraitScope::Edge => &self.edge_specs,
        };
        for (t, val) in traits {
            let spec = specs
                .get(t.0)
                .ok_or_else(|| SstError::InvalidChange(format!("unknown trait id {}", t.0)))?;
            spec.check_value(val)
                .map_err(|e| SstError::InvalidChange(e.to_string()))?;
        }
        Ok(())
    }

    /// Applies a change in place; the returned record undoes it exactly.
    pub fn apply_change(&mut self, c: &GraphChange) -> Result<AppliedChange> {
        self.validate_change(c)?;
        let undo = match c {
            GraphChange::EdgeAddition { source, target, traits } => {
                self.add_edge(*source, *target)?;
                self.set_edge_traits(*source, *target, traits)?;
                Undo::RemoveEdge(*source, *target)
            }
            GraphChange::EdgeDeletion { source, target } => {
                let traits = self.remove_edge(*source, *target)?;
                Undo::RestoreEdge(*source, *target, traits)
            }
            GraphChange::NodeAddition { node, edges, traits } => {
                let fresh_slot = *node as usize == self.slot_count();
                if fresh_slot {
                    self.push_node();
                } else {
                    self.alive[*node as usize] = true;
                    self.live_nodes += 1;
                }
                for &(a, b) in edges {
                    self.add_edge(a, b)?;
                }
                for &(t, val) in traits {
                    self.set_node_trait(*node, t, val)?;
                }
                Undo::RemoveNode {
                    node: *node,
                    fresh_slot,
                }
            }
            GraphChange::NodeDeletion { node } => {
                let v = *node;
                let mut incident: Vec<(NodeId, NodeId)> = self.out_adj[v as usize].iter().map(|&w| (v, w)).collect();
                if self.directed {
                    incident.extend(self.in_adj[v as usize].iter().map(|&w| (w, v)));
                }
                let mut edges = Vec::with_capacity(incident.len());
                for (a, b) in incident {
                    let traits = self.remove_edge(a, b)?;
                    edges.push((a, b, traits));
                }
                let node_traits = self.node_traits_of(v);
                for store in &mut self.node_values {
                    store.remove(&v);
                }
                self.alive[v as usize] = false;
                self.live_nodes -= 1;
                Undo::RestoreNode {
                    node: v,
                    node_traits,
                    edges,
                }
            }
        };
        Ok(AppliedChange(undo))
    }

    /// Reverts a change previously applied with [`Graph::apply_change`].
    pub fn revert_change(&mut self, applied: AppliedChange) -> Result<()> {
        match applied.0 {
            Undo::RemoveEdge(u, v) => {
                self.remove_edge(u, v)?;
            }
            Undo::RestoreEdge(u, v, traits) => {
                self.add_edge(u, v)?;
                self.set_edge_traits(u, v, &traits)?;
            }
            Undo::RemoveNode { node, fresh_slot } => {
                let mut incident: Vec<(NodeId, NodeId)> =
                    self.out_adj[node as usize].iter().map(|&w| (node, w)).collect();
                if self.directed {
                    incident.extend(self.in_adj[node as usize].iter().map(|&w| (w, node)));
                }
                for (a, b) in incident {
                    self.remove_edge(a, b)?;
                }
                for store in &mut self.node_values {
                    store.remove(&node);
                }
                if fresh_slot && node as usize + 1 == self.slot_count() {
                    self.alive.pop();
                    self.out_adj.pop();
                    if self.directed {
                        self.in_adj.pop();
                    }
                } else {
                    self.alive[node as usize] = false;
                }
                self.live_nodes -= 1;
            }
            Undo::RestoreNode {
                node,
                node_traits,
                edges,
            } => {
                self.alive[node as usize] = true;
                self.live_nodes += 1;
                for (t, val) in node_traits {
                    self.set_node_trait(node, t, val)?;
                }
                for (a, b, traits) in edges {
                    self.add_edge(a, b)?;
                    self.set_edge_traits(a, b, &traits)?;
                }
            }
        }
        Ok(())
    }

    // ---- queries ---------------------------------------------------------

    /// Induced subgraph on `s`. Node ids are kept; nodes outside `s` become
    /// dead slots, so `induced_subgraph(V)` equals the original graph.
    pub fn induced_subgraph(&self, s: &NodeSet) -> Result<Graph> {
        if let Some(&bad) = s.as_slice().iter().find(|&&v| !self.contains_node(v)) {
            return Err(invalid_arg(format!("node {bad} is not in the graph")));
        }
        let mut sub = Graph::new(self.directed);
        sub.ensure_nodes(self.slot_count());
        for (i, alive) in sub.alive.iter_mut().enumerate() {
            *alive = s.contains(i as NodeId);
        }
        sub.live_nodes = s.len();
        sub.node_specs = self.node_specs.clone();
        sub.edge_specs = self.edge_specs.clone();
        sub.node_values = self
            .node_values
            .iter()
            .map(|store| {
                store
                    .iter()
                    .filter(|(v, _)| s.contains(**v))
                    .map(|(&v, &val)| (v, val))
                    .collect()
            })
            .collect();
        sub.edge_values = vec![HashMap::new(); self.edge_values.len()];
        for &u in s.as_slice() {
            for &v in &self.out_adj[u as usize] {
                if s.contains(v) && (self.directed || u < v) {
                    sub.add_edge(u, v)?;
                    for (i, store) in self.edge_values.iter().enumerate() {
                        if let Some(&val) = store.get(&(u, v)) {
                            sub.edge_values[i].insert((u, v), val);
                        }
                    }
                }
            }
        }
        Ok(sub)
    }

    /// Node pairs at distance `1..=k`. Undirected graphs report `u < v`;
    /// directed graphs report ordered pairs.
    pub fn within_k_hops(&self, k: usize, metric: HopMetric) -> Result<Vec<HopPair>> {
        if k == 0 {
            return Err(invalid_arg("hop count must be at least 1"));
        }
        let mut out = Vec::new();
        let mut bfs = Bfs::new(self.slot_count());
        for u in self.nodes() {
            let reached = bfs.run(self, u, k, metric, None);
            for &v in reached {
                if v == u {
                    continue;
                }
                if self.directed || u < v {
                    out.push(HopPair {
                        u,
                        v,
                        is_edge: self.has_edge(u, v),
                    });
                }
            }
        }
        out.sort_unstable_by_key(|p| (p.u, p.v));
        Ok(out)
    }

    /// Hop distance from `u` to `v` (skeleton), ignoring the edge `skip`, or
    /// `None` if further than `limit`.
    pub fn bounded_distance(
        &self,
        u: NodeId,
        v: NodeId,
        limit: usize,
        skip: Option<(NodeId, NodeId)>,
    ) -> Option<usize> {
        let mut bfs = Bfs::new(self.slot_count());
        bfs.run(self, u, limit, HopMetric::Skeleton, skip);
        let d = bfs.dist(v);
        (d <= limit).then_some(d)
    }
}

fn insert_sorted(list: &mut Vec<NodeId>, v: NodeId) {
    if let Err(pos) = list.binary_search(&v) {
        list.insert(pos, v);
    }
}

fn remove_sorted(list: &mut Vec<NodeId>, v: NodeId) {
    if let Ok(pos) = list.binary_search(&v) {
        list.remove(pos);
    }
}

/// Reusable bounded breadth-first search.
pub(crate) struct Bfs {
    dist: Vec<usize>,
    stamp: Vec<u32>,
    round: u32,
    order: Vec<NodeId>,
}

impl Bfs {
    pub(crate) fn new(n: usize) -> Self {
        Bfs {
            dist: vec![usize::MAX; n],
            stamp: vec![0; n],
            round: 0,
            order: Vec::new(),
        }
    }

    pub(crate) fn dist(&self, v: NodeId) -> usize {
        if self.stamp[v as usize] == self.round {
            self.dist[v as usize]
        } else {
            usize::MAX
        }
    }

    /// Visits everything within `limit` hops of `src`; returns visit order.
    /// `skip` removes one edge (both directions on the skeleton).
    pub(crate) fn run(
        &mut self,
        g: &Graph,
        src: NodeId,
        limit: usize,
        metric: HopMetric,
        skip: Option<(NodeId, NodeId)>,
    ) -> &[NodeId] {
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.fill(0);
            self.round = 1;
        }
        self.order.clear();
        let mut queue = VecDeque::new();
        self.visit(src, 0);
        queue.push_back(src);
        let skipped = |a: NodeId, b: NodeId| match skip {
            Some((x, y)) => (a == x && b == y) || (!g.is_directed() && a == y && b == x),
            None => false,
        };
        while let Some(x) = queue.pop_front() {
            let d = self.dist[x as usize];
            if d == limit {
                continue;
            }
            let out = g.out_neighbors(x).iter().map(|&y| (y, x, y));
            let inn: Box<dyn Iterator<Item = (NodeId, NodeId, NodeId)>> =
                if g.is_directed() && metric == HopMetric::Skeleton {
                    Box::new(g.in_neighbors(x).iter().map(move |&y| (y, y, x)))
                } else {
                    Box::new(std::iter::empty())
                };
            for (y, a, b) in out.chain(inn) {
                if skipped(a, b) || self.stamp[y as usize] == self.round {
                    continue;
                }
                self.visit(y, d + 1);
                queue.push_back(y);
            }
        }
        &self.order
    }

    fn visit(&mut self, v: NodeId, d: usize) {
        self.stamp[v as usize] = self.round;
        self.dist[v as usize] = d;
        self.order.push(v);
    }
}

impl TraitSpec {
    pub(crate) fn check_value(&self, value: &TraitValue) -> Result<()> {
        match (&self.kind, value) {
            (TraitKind::Class { values }, TraitValue::Class(i)) if (*i as usize) < values.len() => Ok(()),
            (TraitKind::Rank, TraitValue::Rank(x)) if !x.is_nan() => Ok(()),
            _ => Err(invalid_arg(format!(
                "value {value:?} does not fit trait {:?}",
                self.name
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n as NodeId - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(false, n, &edges).unwrap()
    }

    #[test]
    fn induced_subgraph_of_triangle() {
        let g = Graph::from_edges(false, 3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let sub = g.induced_subgraph(&NodeSet::new(vec![0, 1])).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn induced_subgraph_on_all_nodes_is_identity() {
        let g = Graph::from_edges(true, 4, &[(0, 1), (1, 0), (2, 3), (3, 1)]).unwrap();
        let all = NodeSet::new(g.nodes().collect());
        assert_eq!(g.induced_subgraph(&all).unwrap(), g);
    }

    #[test]
    fn induced_subgraph_without_edges() {
        let g = path(4);
        let sub = g.induced_subgraph(&NodeSet::new(vec![0, 2])).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 0);
    }

    #[test]
    fn induced_subgraph_rejects_unknown_node() {
        let g = path(3);
        assert!(matches!(
            g.induced_subgraph(&NodeSet::new(vec![0, 7])),
            Err(SstError::InvalidArgument(_))
        ));
    }

    #[test]
    fn hops_on_five_path() {
        let g = path(5);
        let pairs = g.within_k_hops(3, HopMetric::Skeleton).unwrap();
        assert_eq!(pairs.len(), 4 + 3 + 2);
        assert!(!pairs.iter().any(|p| (p.u, p.v) == (0, 4)));
        assert_eq!(pairs.iter().filter(|p| p.is_edge).count(), 4);
    }

    #[test]
    fn hops_on_k4() {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
            }
        }
        let g = Graph::from_edges(false, 4, &edges).unwrap();
        assert_eq!(g.within_k_hops(3, HopMetric::Skeleton).unwrap().len(), 6);
    }

    #[test]
    fn directed_hops_skeleton_vs_directed() {
        // 0 -> 1 <- 2
        let g = Graph::from_edges(true, 3, &[(0, 1), (2, 1)]).unwrap();
        let skel = g.within_k_hops(3, HopMetric::Skeleton).unwrap();
        assert_eq!(skel.len(), 6);
        let dir = g.within_k_hops(3, HopMetric::Directed).unwrap();
        let got: Vec<_> = dir.iter().map(|p| (p.u, p.v)).collect();
        assert_eq!(got, vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn hop_count_zero_rejected() {
        assert!(path(3).within_k_hops(0, HopMetric::Skeleton).is_err());
    }

    #[test]
    fn edge_addition_round_trip() {
        let mut g = path(4);
        let before = g.clone();
        let rec = g.apply_change(&GraphChange::add_edge(0, 3)).unwrap();
        assert!(g.has_edge(3, 0));
        g.revert_change(rec).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn node_addition_grows_graph() {
        let mut g = path(5);
        let change = GraphChange::NodeAddition {
            node: 5,
            edges: vec![(5, 1)],
            traits: vec![],
        };
        let rec = g.apply_change(&change).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(g.edge_count(), 5);
        g.revert_change(rec).unwrap();
        assert_eq!(g, path(5));
    }

    #[test]
    fn node_deletion_restores_edges_and_traits() {
        let mut g = Graph::from_edges(true, 3, &[(0, 1), (1, 2), (2, 1)]).unwrap();
        let t = g.register_trait(TraitSpec::edge_class("kind", &["a", "b"])).unwrap();
        g.set_edge_trait(2, 1, t, TraitValue::Class(1)).unwrap();
        let before = g.clone();
        let rec = g.apply_change(&GraphChange::NodeDeletion { node: 1 }).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(!g.contains_node(1));
        g.revert_change(rec).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn deleting_absent_edge_is_invalid() {
        let mut g = path(3);
        assert!(matches!(
            g.apply_change(&GraphChange::delete_edge(0, 2)),
            Err(SstError::InvalidChange(_))
        ));
    }

    #[test]
    fn adding_present_edge_is_invalid() {
        let mut g = path(3);
        assert!(g.apply_change(&GraphChange::add_edge(1, 0)).is_err());
    }

    #[test]
    fn bounded_distance_skips_edge() {
        let mut edges: Vec<_> = (0..5).map(|i| (i, i + 1)).collect();
        edges.push((5, 0));
        let cycle = Graph::from_edges(false, 6, &edges).unwrap();
        assert_eq!(cycle.bounded_distance(0, 5, 10, None), Some(1));
        assert_eq!(cycle.bounded_distance(0, 5, 10, Some((5, 0))), Some(5));
        assert_eq!(cycle.bounded_distance(0, 5, 3, Some((0, 5))), None);
    }
}
