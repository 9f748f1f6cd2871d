//! Read-only view of a graph with one change applied on top.

use crate::error::{Result, SstError};
use crate::graph::{Graph, GraphChange, NodeId};
use crate::traits::{TraitId, TraitOverlay, TraitValue};

/// The graph in the state where the changed element exists: the after-state
/// for additions and the before-state for deletions. The base graph is never
/// mutated, so many views can share one base concurrently.
pub struct ChangeView<'a> {
    base: &'a Graph,
    change: &'a GraphChange,
    hidden: Option<(NodeId, NodeId)>,
    overlay: &'a TraitOverlay,
}

impl<'a> ChangeView<'a> {
    /// `hidden` names an edge of `base` that is treated as absent before the
    /// change; use it to count an existing edge as if it were just added.
    pub fn new(
        base: &'a Graph,
        change: &'a GraphChange,
        hidden: Option<(NodeId, NodeId)>,
        overlay: &'a TraitOverlay,
    ) -> Result<Self> {
        if let Some((u, v)) = hidden {
            if !base.has_edge(u, v) {
                return Err(SstError::InvalidChange(format!(
                    "hidden edge ({u}, {v}) is not in the graph"
                )));
            }
        }
        let view = ChangeView {
            base,
            change,
            hidden,
            overlay,
        };
        view.validate()?;
        Ok(view)
    }

    fn validate(&self) -> Result<()> {
        match self.change {
            GraphChange::EdgeAddition { source, target, .. } if self.is_hidden(*source, *target) => {
                // re-adding the hidden edge: only the trait values are checked
                let GraphChange::EdgeAddition { traits, .. } = self.change else {
                    unreachable!()
                };
                for (t, val) in traits {
                    let spec = self
                        .base
                        .edge_trait_specs()
                        .get(t.0)
                        .ok_or_else(|| SstError::InvalidChange(format!("unknown trait id {}", t.0)))?;
                    spec.check_value(val)
                        .map_err(|e| SstError::InvalidChange(e.to_string()))?;
                }
                Ok(())
            }
            _ => self.base.validate_change(self.change),
        }
    }

    pub fn base(&self) -> &Graph {
        self.base
    }

    pub fn change(&self) -> &GraphChange {
        self.change
    }

    pub fn is_directed(&self) -> bool {
        self.base.is_directed()
    }

    fn is_hidden(&self, a: NodeId, b: NodeId) -> bool {
        match self.hidden {
            Some((x, y)) => (a == x && b == y) || (!self.base.is_directed() && a == y && b == x),
            None => false,
        }
    }

    /// Whether the arc `a -> b` is the element added by the change.
    fn is_added_arc(&self, a: NodeId, b: NodeId) -> bool {
        let directed = self.base.is_directed();
        match self.change {
            GraphChange::EdgeAddition { source, target, .. } => {
                (a == *source && b == *target) || (!directed && a == *target && b == *source)
            }
            GraphChange::NodeAddition { edges, .. } => edges
                .iter()
                .any(|&(x, y)| (a == x && b == y) || (!directed && a == y && b == x)),
            _ => false,
        }
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        match self.change {
            GraphChange::NodeAddition { node, .. } if *node == v => true,
            _ => self.base.contains_node(v),
        }
    }

    /// Arc test in the element-present state.
    pub fn has_arc(&self, a: NodeId, b: NodeId) -> bool {
        if self.is_added_arc(a, b) {
            return true;
        }
        !self.is_hidden(a, b) && self.base.has_edge(a, b)
    }

    pub fn adjacent_skeleton(&self, a: NodeId, b: NodeId) -> bool {
        self.has_arc(a, b) || (self.base.is_directed() && self.has_arc(b, a))
    }

    /// Calls `f` for each skeleton neighbor of `x`; a neighbor joined in both
    /// directions may be reported twice.
    pub fn for_each_neighbor(&self, x: NodeId, mut f: impl FnMut(NodeId)) {
        if self.base.contains_node(x) {
            let directed = self.base.is_directed();
            for &y in self.base.out_neighbors(x) {
                if !self.is_hidden(x, y) {
                    f(y);
                }
            }
            if directed {
                for &y in self.base.in_neighbors(x) {
                    if !self.is_hidden(y, x) {
                        f(y);
                    }
                }
            }
        }
        match self.change {
            GraphChange::EdgeAddition { source, target, .. } => {
                if x == *source {
                    f(*target);
                } else if x == *target {
                    f(*source);
                }
            }
            GraphChange::NodeAddition { edges, .. } => {
                for &(a, b) in edges {
                    if a == x {
                        f(b);
                    } else if b == x {
                        f(a);
                    }
                }
            }
            _ => {}
        }
    }

    pub fn node_trait(&self, v: NodeId, t: TraitId) -> Option<TraitValue> {
        if let Some(val) = self.overlay.node(v, t) {
            return Some(val);
        }
        if let GraphChange::NodeAddition { node, traits, .. } = self.change {
            if *node == v {
                return traits
                    .iter()
                    .find(|(id, _)| *id == t)
                    .map(|e| e.1)
                    .or(self.base.node_trait_specs()[t.0].default);
            }
        }
        self.base.node_trait(v, t)
    }

    pub fn edge_trait(&self, a: NodeId, b: NodeId, t: TraitId) -> Option<TraitValue> {
        let key = self.base.edge_key(a, b);
        if let Some(val) = self.overlay.edge(key, t) {
            return Some(val);
        }
        if self.is_added_arc(a, b) {
            let from_change = match self.change {
                GraphChange::EdgeAddition { traits, .. } => traits.iter().find(|(id, _)| *id == t).map(|e| e.1),
                _ => None,
            };
            return from_change.or(self.base.edge_trait_specs()[t.0].default);
        }
        self.base.edge_trait(a, b, t)
    }
}
