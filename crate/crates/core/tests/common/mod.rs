//! Brute-force reference implementations: every k-subset is filtered for
//! connectivity and classified by minimizing its encoding over all node
//! permutations. Nothing here calls the library's enumerator or labeler
//! except `check`, which compares the two.
#![allow(dead_code)]

pub mod check;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sst_core::labeler::Marked;
use sst_core::{Graph, GraphChange, NodeId, TraitId, TraitValue};

/// A small colored graph in oracle form.
#[derive(Clone, Debug)]
pub struct Small {
    pub directed: bool,
    pub node: Vec<Vec<u32>>,
    /// `(i, j)` with `i < j` when undirected.
    pub arcs: BTreeMap<(usize, usize), Vec<u32>>,
    pub marked: Marked,
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

impl Small {
    fn arc(&self, i: usize, j: usize) -> Option<&Vec<u32>> {
        let key = if self.directed || i < j { (i, j) } else { (j, i) };
        self.arcs.get(&key)
    }

    /// Encoding with node `perm[p]` placed at position `p`.
    fn encode(&self, perm: &[usize]) -> Vec<u32> {
        let n = perm.len();
        let mut pos = vec![0; n];
        for (p, &v) in perm.iter().enumerate() {
            pos[v] = p;
        }
        let mut out = vec![n as u32, self.directed as u32];
        match self.marked {
            Marked::Node(a) => out.extend([0, pos[a] as u32, 0]),
            Marked::Edge(a, b) => {
                let (x, y) = (pos[a], pos[b]);
                let (x, y) = if self.directed || x < y { (x, y) } else { (y, x) };
                out.extend([1, x as u32, y as u32]);
            }
        }
        for &v in perm {
            out.extend(&self.node[v]);
        }
        for p in 0..n {
            for q in 0..n {
                if p == q || (!self.directed && q < p) {
                    continue;
                }
                match self.arc(perm[p], perm[q]) {
                    Some(codes) => {
                        out.push(1);
                        out.extend(codes);
                    }
                    None => out.push(0),
                }
            }
        }
        out
    }

    /// Minimum encoding over all permutations.
    pub fn key_with(&self, perms: &[Vec<usize>]) -> Vec<u32> {
        perms.iter().map(|p| self.encode(p)).min().unwrap()
    }

    pub fn key(&self) -> Vec<u32> {
        self.key_with(&permutations(self.node.len()))
    }

    pub fn arc_list(&self) -> Vec<(usize, usize, Vec<u32>)> {
        self.arcs.iter().map(|(&(i, j), c)| (i, j, c.clone())).collect()
    }
}

/// Skeleton connectivity of `nodes` in `g`, by plain search.
pub fn connected(g: &Graph, nodes: &[NodeId]) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..nodes.len() {
            if !seen[j] && (g.has_edge(nodes[i], nodes[j]) || g.has_edge(nodes[j], nodes[i])) {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// All k-subsets of `g`'s nodes containing `anchors` that are connected,
/// each sorted.
pub fn brute_contexts(g: &Graph, anchors: &[NodeId], k: usize) -> Vec<Vec<NodeId>> {
    let rest: Vec<NodeId> = g.nodes().filter(|v| !anchors.contains(v)).collect();
    let mut out = Vec::new();
    if k < anchors.len() {
        return out;
    }
    let need = k - anchors.len();
    let mut pick = Vec::new();
    fn rec(rest: &[NodeId], start: usize, need: usize, pick: &mut Vec<NodeId>, f: &mut dyn FnMut(&[NodeId])) {
        if pick.len() == need {
            f(pick);
            return;
        }
        for i in start..rest.len() {
            pick.push(rest[i]);
            rec(rest, i + 1, need, pick, f);
            pick.pop();
        }
    }
    rec(&rest, 0, need, &mut pick, &mut |p| {
        let mut s: Vec<NodeId> = anchors.iter().copied().chain(p.iter().copied()).collect();
        s.sort_unstable();
        if connected(g, &s) {
            out.push(s);
        }
    });
    out
}

fn dense_desc_ranks(values: &[Option<f64>]) -> Vec<u32> {
    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
    present.sort_by(|a, b| b.partial_cmp(a).unwrap());
    present.dedup();
    values
        .iter()
        .map(|v| match v {
            Some(x) => present.iter().position(|p| p == x).unwrap() as u32 + 1,
            None => 0,
        })
        .collect()
}

fn codes(g: &Graph, node_scope: bool, values: &[Option<TraitValue>], t: usize) -> Vec<u32> {
    let specs = if node_scope {
        g.node_trait_specs()
    } else {
        g.edge_trait_specs()
    };
    if specs[t].is_rank() {
        let xs: Vec<Option<f64>> = values
            .iter()
            .map(|v| match v {
                Some(TraitValue::Rank(x)) if !x.is_nan() => Some(*x),
                _ => None,
            })
            .collect();
        dense_desc_ranks(&xs)
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

/// Oracle form of the subgraph of `state` induced by `nodes` (sorted).
pub fn small_of(g: &Graph, nodes: &[NodeId], marked: Marked) -> Small {
    let n = nodes.len();
    let directed = g.is_directed();
    let mut node = vec![Vec::new(); n];
    for t in 0..g.node_trait_specs().len() {
        let vals: Vec<_> = nodes.iter().map(|&v| g.node_trait(v, TraitId(t))).collect();
        for (c, code) in node.iter_mut().zip(codes(g, true, &vals, t)) {
            c.push(code);
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && (directed || i < j) && g.has_edge(nodes[i], nodes[j]) {
                pairs.push((i, j));
            }
        }
    }
    let mut arc_codes = vec![Vec::new(); pairs.len()];
    for t in 0..g.edge_trait_specs().len() {
        let vals: Vec<_> = pairs
            .iter()
            .map(|&(i, j)| g.edge_trait(nodes[i], nodes[j], TraitId(t)))
            .collect();
        for (c, code) in arc_codes.iter_mut().zip(codes(g, false, &vals, t)) {
            c.push(code);
        }
    }
    Small {
        directed,
        node,
        arcs: pairs.into_iter().zip(arc_codes).collect(),
        marked,
    }
}

/// The graph state a change is labeled in, and the anchors.
pub fn labeled_state(g: &Graph, change: &GraphChange) -> (Graph, Vec<NodeId>) {
    let mut state = g.clone();
    if change.is_addition() {
        let _ = state.apply_change(change).expect("valid change");
    }
    (state, change.anchors())
}

fn marked_in(change: &GraphChange, nodes: &[NodeId]) -> Marked {
    let pos = |v: NodeId| nodes.iter().position(|&x| x == v).unwrap();
    match change {
        GraphChange::EdgeAddition { source, target, .. } | GraphChange::EdgeDeletion { source, target } => {
            Marked::Edge(pos(*source), pos(*target))
        }
        GraphChange::NodeAddition { node, .. } | GraphChange::NodeDeletion { node } => Marked::Node(pos(*node)),
    }
}

/// Oracle counts: class key -> number of contexts, plus each context's key.
pub struct OracleCount {
    pub contexts: Vec<(Vec<NodeId>, Vec<u32>)>,
    pub classes: BTreeMap<Vec<u32>, u32>,
}

pub fn oracle_count(g: &Graph, change: &GraphChange, k: usize) -> OracleCount {
    let (state, anchors) = labeled_state(g, change);
    let perms = permutations(k);
    let mut contexts = Vec::new();
    let mut classes = BTreeMap::new();
    for s in brute_contexts(&state, &anchors, k) {
        let key = small_of(&state, &s, marked_in(change, &s)).key_with(&perms);
        *classes.entry(key.clone()).or_insert(0) += 1;
        contexts.push((s, key));
    }
    OracleCount { contexts, classes }
}

/// Checks that `labels` (one per oracle context) induce exactly the oracle's
/// partition: equal labels iff equal keys.
pub fn same_partition<L: Clone + Ord + std::fmt::Debug>(keys: &[Vec<u32>], labels: &[L]) -> Result<(), String> {
    let mut fwd: HashMap<&Vec<u32>, &L> = HashMap::new();
    let mut back: BTreeMap<&L, &Vec<u32>> = BTreeMap::new();
    for (k, l) in keys.iter().zip(labels) {
        if let Some(prev) = fwd.insert(k, l) {
            if prev != l {
                return Err(format!("isomorphic inputs got labels {prev:?} and {l:?}"));
            }
        }
        if let Some(prev) = back.insert(l, k) {
            if prev != k {
                return Err(format!("label {l:?} shared by non-isomorphic inputs"));
            }
        }
    }
    Ok(())
}

/// Erdős–Rényi graph.
pub fn gnp(n: usize, p: f64, directed: bool, rng: &mut ChaCha8Rng) -> Graph {
    let mut g = Graph::with_nodes(directed, n);
    for u in 0..n as NodeId {
        for v in 0..n as NodeId {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.gen::<f64>() < p {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random edge change: add a non-edge or delete an edge, whichever the
/// coin picks and the graph allows.
pub fn random_edge_change(g: &Graph, rng: &mut ChaCha8Rng) -> Option<GraphChange> {
    let n = g.node_count() as NodeId;
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let add = rng.gen_bool(0.5) || edges.is_empty();
    if add {
        for _ in 0..100 {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && !g.has_edge(u, v) && (g.is_directed() || !g.has_edge(v, u)) {
                return Some(GraphChange::add_edge(u, v));
            }
        }
        None
    } else {
        let (u, v) = edges[rng.gen_range(0..edges.len())];
        Some(GraphChange::delete_edge(u, v))
    }
}

/// Sorted set view of a context list, for duplicate checks.
pub fn as_set(contexts: &[Vec<NodeId>]) -> BTreeSet<Vec<NodeId>> {
    contexts.iter().cloned().collect()
}

/// Registers a node class trait, a node rank trait and an edge class trait
/// and fills them randomly, leaving some values missing.
pub fn decorate(g: &mut Graph, rng: &mut ChaCha8Rng) {
    use sst_core::{TraitScope, TraitSpec};
    let kind = g.register_trait(TraitSpec::node_class("kind", &["a", "b"])).unwrap();
    let score = g.register_trait(TraitSpec::rank(TraitScope::Node, "score")).unwrap();
    let tie = g.register_trait(TraitSpec::edge_class("tie", &["x", "y"])).unwrap();
    let nodes: Vec<NodeId> = g.nodes().collect();
    for v in nodes {
        if rng.gen_bool(0.8) {
            g.set_node_trait(v, kind, TraitValue::Class(rng.gen_range(0..2)))
                .unwrap();
        }
        if rng.gen_bool(0.8) {
            // few distinct values so ties are common
            g.set_node_trait(v, score, TraitValue::Rank(rng.gen_range(0..4) as f64))
                .unwrap();
        }
    }
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    for (u, v) in edges {
        if rng.gen_bool(0.8) {
            g.set_edge_trait(u, v, tie, TraitValue::Class(rng.gen_range(0..2)))
                .unwrap();
        }
    }
}

/// Area under the interpolated precision-recall curve by midpoint
/// quadrature on a recall grid of at least `min_steps` cells, aligned so
/// that every recall level `t / P` is a cell boundary.
pub fn numeric_aupr(items: &[(f64, bool)], min_steps: usize) -> f64 {
    let mut sorted: Vec<(f64, bool)> = items.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut pts = vec![(0.0f64, 0.0f64)];
    let mut i = 0;
    while i < sorted.len() {
        let (mut tp, mut fp) = *pts.last().unwrap();
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            j += 1;
        }
        pts.push((tp, fp));
        i = j;
    }
    let p = pts.last().unwrap().0;
    let per_level = min_steps.div_ceil(p as usize);
    let steps = per_level * p as usize;
    let h = 1.0 / steps as f64;
    let mut seg = 1;
    let mut area = 0.0;
    for c in 0..steps {
        let x = (c as f64 + 0.5) * h * p;
        // first segment whose true-positive range covers x
        while !(pts[seg].0 > pts[seg - 1].0 && x <= pts[seg].0) {
            seg += 1;
        }
        let ((ta, fa), (tb, fb)) = (pts[seg - 1], pts[seg]);
        let fx = fa + (fb - fa) / (tb - ta) * (x - ta);
        area += if x + fx > 0.0 { x / (x + fx) } else { 0.0 } * h;
    }
    area
}

/// Mann-Whitney AUC by comparing every positive with every negative.
pub fn pairwise_auc(items: &[(f64, bool)]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for a in items.iter().filter(|x| x.1) {
        for b in items.iter().filter(|x| !x.1) {
            pairs += 1.0;
            if a.0 > b.0 {
                wins += 1.0;
            } else if a.0 == b.0 {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn scored(items: &[(f64, bool)]) -> Vec<sst_core::metrics::Scored> {
    items
        .iter()
        .enumerate()
        .map(|(i, &(score, positive))| sst_core::metrics::Scored {
            source: i as NodeId,
            target: 0,
            score,
            positive,
        })
        .collect()
}

/// Random scored set with at least one item of each class; `levels` bounds
/// the distinct score values (few levels give many ties).
pub fn random_scored(rng: &mut ChaCha8Rng, len: usize, levels: u32) -> Vec<(f64, bool)> {
    let mut out: Vec<(f64, bool)> = (0..len)
        .map(|_| (rng.gen_range(0..levels) as f64 / levels as f64, rng.gen_bool(0.3)))
        .collect();
    out[0].1 = true;
    out[1].1 = false;
    out
}

/// Label-string view of count vectors, comparable across registries.
pub fn named(
    vectors: &[sst_core::counter::SstVector],
    registry: &sst_core::LabelRegistry,
) -> Vec<BTreeMap<String, u32>> {
    vectors
        .iter()
        .map(|v| {
            v.entries
                .iter()
                .map(|(id, &c)| (registry.get(*id).unwrap().to_string(), c))
                .collect()
        })
        .collect()
}

/// Features for the positives of bucket `horizon` computed from the real
/// buckets and from copies whose buckets `horizon..` are scrambled or
/// dropped; any difference means later buckets leaked into the features.
pub fn leakage_check(
    stream: &sst_core::io::TemporalEdgeStream,
    tau: usize,
    horizon: usize,
    k: usize,
    seed: u64,
) -> Result<usize, String> {
    use sst_core::io::{bucket_stream, WeightedEdge};
    use sst_core::predictor::temporal_features;
    let buckets = bucket_stream(stream, tau).map_err(|e| e.to_string())?;
    let n = stream.node_count();
    let positives: Vec<(NodeId, NodeId)> = buckets[horizon]
        .edges
        .iter()
        .map(|e| (e.source, e.target))
        .filter(|&(u, v)| stream.directed || u != v)
        .collect();
    let features = |b: &[sst_core::io::Bucket]| {
        let registry = sst_core::LabelRegistry::new();
        temporal_features(b, horizon, n, stream.directed, k, &positives, &registry)
            .map(|v| named(&v, &registry))
            .map_err(|e| e.to_string())
    };
    let reference = features(&buckets)?;

    let mut r = rng(seed);
    let mut scrambled = buckets.clone();
    for b in &mut scrambled[horizon..] {
        for e in &mut b.edges {
            let s = r.gen_range(0..n as NodeId);
            let t = (s + 1 + r.gen_range(0..n as NodeId - 1)) % n as NodeId;
            *e = WeightedEdge {
                source: s,
                target: t,
                weight: r.gen_range(1..5),
            };
        }
    }
    if features(&scrambled)? != reference {
        return Err("features changed when later buckets were scrambled".into());
    }
    if features(&buckets[..horizon])? != reference {
        return Err("features changed when later buckets were dropped".into());
    }
    Ok(positives.len())
}
