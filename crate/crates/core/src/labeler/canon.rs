//! Canonical ordering of small colored graphs.
//!
//! Colors are refined with one-dimensional Weisfeiler-Lehman iterations whose
//! neighbor signatures include edge colors and arc direction. When the stable
//! coloring still has ties, one node of the first non-singleton cell is
//! individualized and the search recurses; the leaf with the
//! lexicographically smallest serialization wins. Automorphisms discovered at
//! equal leaves prune sibling branches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SstError};

/// Largest subgraph the labeler accepts.
pub const MAX_NODES: usize = 9;

/// The changed element, as positions in the colored graph's node list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marked {
    Node(usize),
    /// Arc `from -> to`; orientation is irrelevant on undirected graphs.
    Edge(usize, usize),
}

/// A graph of at most [`MAX_NODES`] nodes with dense node and edge colors.
///
/// The marked element always carries a color of its own, and elements with
/// different trait tuples never share a color.
#[derive(Clone, Debug)]
pub struct ColoredGraph {
    directed: bool,
    n: usize,
    node_colors: Vec<u32>,
    // row-major n*n; 0 = no arc, otherwise edge color + 1 (symmetric if undirected)
    arcs: Vec<u32>,
    marked: Marked,
    node_palette: Vec<String>,
    edge_palette: Vec<String>,
}

impl ColoredGraph {
    /// Builds a colored graph from per-element trait codes.
    ///
    /// `arcs` lists each edge once (`(from, to, codes)`; either orientation
    /// for undirected graphs). Colors are the ranks of the distinct
    /// `(is_marked, codes)` tuples, and the renderers turn a code tuple into
    /// the token used in label strings.
    pub fn from_codes(
        directed: bool,
        node_codes: &[Vec<u32>],
        arcs: &[(usize, usize, Vec<u32>)],
        marked: Marked,
        render_node: impl Fn(&[u32]) -> String,
        render_edge: impl Fn(&[u32]) -> String,
    ) -> Result<Self> {
        let n = node_codes.len();
        if n == 0 || n > MAX_NODES {
            return Err(SstError::UnsupportedSize {
                size: n,
                max: MAX_NODES,
            });
        }
        let is_marked_arc = |a: usize, b: usize| match marked {
            Marked::Edge(x, y) => (a == x && b == y) || (!directed && a == y && b == x),
            Marked::Node(_) => false,
        };
        match marked {
            Marked::Node(v) if v >= n => return Err(invalid_arg("marked node out of range")),
            Marked::Edge(a, b) if a >= n || b >= n || a == b => return Err(invalid_arg("marked edge out of range")),
            Marked::Edge(..) if !arcs.iter().any(|&(x, y, _)| is_marked_arc(x, y)) => {
                return Err(invalid_arg("marked edge is not one of the arcs"))
            }
            _ => {}
        }

        let mut node_keys: BTreeMap<(bool, &[u32]), u32> = BTreeMap::new();
        for (v, codes) in node_codes.iter().enumerate() {
            node_keys.insert((marked == Marked::Node(v), codes.as_slice()), 0);
        }
        let node_palette = dense_palette(&mut node_keys, &render_node);
        let node_colors = node_codes
            .iter()
            .enumerate()
            .map(|(v, codes)| node_keys[&(marked == Marked::Node(v), codes.as_slice())])
            .collect();

        let mut edge_keys: BTreeMap<(bool, &[u32]), u32> = BTreeMap::new();
        for (a, b, codes) in arcs {
            if *a >= n || *b >= n || a == b {
                return Err(invalid_arg(format!("bad arc ({a}, {b})")));
            }
            edge_keys.insert((is_marked_arc(*a, *b), codes.as_slice()), 0);
        }
        let edge_palette = dense_palette(&mut edge_keys, &render_edge);
        let mut adj = vec![0u32; n * n];
        for (a, b, codes) in arcs {
            let color = edge_keys[&(is_marked_arc(*a, *b), codes.as_slice())] + 1;
            let slots = [a * n + b, b * n + a];
            for &s in &slots[..if directed { 1 } else { 2 }] {
                if adj[s] != 0 {
                    return Err(invalid_arg(format!("duplicate arc ({a}, {b})")));
                }
                adj[s] = color;
            }
        }

        let marked = match marked {
            Marked::Edge(a, b) if !directed && a > b => Marked::Edge(b, a),
            m => m,
        };
        Ok(ColoredGraph {
            directed,
            n,
            node_colors,
            arcs: adj,
            marked,
            node_palette,
            edge_palette,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn marked(&self) -> Marked {
        self.marked
    }

    pub fn node_colors(&self) -> &[u32] {
        &self.node_colors
    }

    /// Edge color of the arc `a -> b`, if present.
    pub fn arc(&self, a: usize, b: usize) -> Option<u32> {
        match self.arcs[a * self.n + b] {
            0 => None,
            c => Some(c - 1),
        }
    }

    /// Connectivity of the undirected skeleton.
    pub fn is_connected(&self) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                if !seen[y] && (self.arcs[x * n + y] != 0 || self.arcs[y * n + x] != 0) {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Renders the label string for the graph laid out in `order`
    /// (`order[p]` is the node placed at position `p`).
    pub fn serialize(&self, order: &[usize]) -> String {
        let n = self.n;
        let mut pos = vec![0usize; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let nodes: Vec<&str> = order
            .iter()
            .map(|&v| self.node_palette[self.node_colors[v] as usize].as_str())
            .collect();
        let mut edges = Vec::new();
        for p in 0..n {
            for q in 0..n {
                if p == q || (!self.directed && q < p) {
                    continue;
                }
                if let Some(c) = self.arc(order[p], order[q]) {
                    let sep = if self.directed { '>' } else { '-' };
                    let token = &self.edge_palette[c as usize];
                    if token.is_empty() {
                        edges.push(format!("{p}{sep}{q}"));
                    } else {
                        edges.push(format!("{p}{sep}{q}[{token}]"));
                    }
                }
            }
        }
        let marked = match self.marked {
            Marked::Node(v) => format!("n{}", pos[v]),
            Marked::Edge(a, b) => {
                let (pa, pb) = (pos[a], pos[b]);
                if self.directed {
                    format!("e{pa}>{pb}")
                } else {
                    format!("e{}-{}", pa.min(pb), pa.max(pb))
                }
            }
        };
        format!(
            "{};{};{};{};{}",
            n,
            if self.directed { 'D' } else { 'U' },
            nodes.join(","),
            edges.join(","),
            marked
        )
    }
}

fn dense_palette(keys: &mut BTreeMap<(bool, &[u32]), u32>, render: &impl Fn(&[u32]) -> String) -> Vec<String> {
    let mut palette = Vec::with_capacity(keys.len());
    for (i, ((_, codes), color)) in keys.iter_mut().enumerate() {
        *color = i as u32;
        palette.push(render(codes));
    }
    palette
}

/// Result of canonical labeling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// `order[p]` is the node placed at canonical position `p`.
    pub order: Vec<usize>,
    /// Numeric serialization compared during the search.
    pub serial: Vec<u32>,
}

/// Stable coloring reached by refinement alone, without individualization.
pub fn stable_coloring(cg: &ColoredGraph) -> Vec<u32> {
    let search = Search::new(cg);
    let mut colors = search.initial_colors();
    search.refine(&mut colors);
    colors[..cg.n].iter().map(|&c| c as u32).collect()
}

/// Canonical node ordering: a pure function of the isomorphism class of `cg`
/// (respecting node colors, edge colors, direction and the marked element).
pub fn canonical_form(cg: &ColoredGraph) -> CanonicalForm {
    let mut search = Search::new(cg);
    let colors = search.initial_colors();
    let mut path = Vec::with_capacity(cg.n);
    search.explore(colors, &mut path);
    let (serial, order) = search.best.expect("search always reaches a leaf");
    CanonicalForm {
        order: order[..cg.n].iter().map(|&v| v as usize).collect(),
        serial,
    }
}

type Colors = [u8; MAX_NODES];

struct Search<'a> {
    cg: &'a ColoredGraph,
    n: usize,
    best: Option<(Vec<u32>, Colors)>,
    automorphisms: Vec<Colors>,
}

const SIG_LEN: usize = 2 * MAX_NODES + 1;

impl<'a> Search<'a> {
    fn new(cg: &'a ColoredGraph) -> Self {
        Search {
            cg,
            n: cg.n,
            best: None,
            automorphisms: Vec::new(),
        }
    }

    /// Initial node colors re-ranked to `0..cells`.
    fn initial_colors(&self) -> Colors {
        let mut distinct: Vec<u32> = self.cg.node_colors.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let mut colors = [0u8; MAX_NODES];
        for v in 0..self.n {
            colors[v] = distinct.binary_search(&self.cg.node_colors[v]).unwrap() as u8;
        }
        colors
    }

    /// Refines to the coarsest stable coloring; returns the number of cells.
    fn refine(&self, colors: &mut Colors) -> usize {
        let n = self.n;
        let arcs = &self.cg.arcs;
        let mut cells = count_cells(colors, n);
        let mut sigs = [[0u32; SIG_LEN]; MAX_NODES];
        let mut lens = [0usize; MAX_NODES];
        while cells < n {
            for v in 0..n {
                let sig = &mut sigs[v];
                sig[0] = colors[v] as u32;
                let mut k = 1;
                for w in 0..n {
                    if w == v {
                        continue;
                    }
                    let out = arcs[v * n + w];
                    if out != 0 {
                        sig[k] = (colors[w] as u32) << 24 | out << 1;
                        k += 1;
                    }
                    if self.cg.directed {
                        let inc = arcs[w * n + v];
                        if inc != 0 {
                            sig[k] = (colors[w] as u32) << 24 | inc << 1 | 1;
                            k += 1;
                        }
                    }
                }
                sig[1..k].sort_unstable();
                lens[v] = k;
            }
            let mut idx = [0usize; MAX_NODES];
            for (i, x) in idx.iter_mut().enumerate() {
                *x = i;
            }
            idx[..n].sort_unstable_by(|&a, &b| sigs[a][..lens[a]].cmp(&sigs[b][..lens[b]]));
            let mut next = [0u8; MAX_NODES];
            let mut color = 0u8;
            for i in 0..n {
                if i > 0 && sigs[idx[i]][..lens[idx[i]]] != sigs[idx[i - 1]][..lens[idx[i - 1]]] {
                    color += 1;
                }
                next[idx[i]] = color;
            }
            let new_cells = color as usize + 1;
            *colors = next;
            if new_cells == cells {
                break;
            }
            cells = new_cells;
        }
        cells
    }

    fn explore(&mut self, mut colors: Colors, path: &mut Vec<u8>) {
        let n = self.n;
        if self.refine(&mut colors) == n {
            self.leaf(&colors);
            return;
        }
        let mut sizes = [0u8; MAX_NODES];
        for &c in &colors[..n] {
            sizes[c as usize] += 1;
        }
        let target = (0..n).find(|&c| sizes[c] > 1).unwrap() as u8;
        let members: Vec<u8> = (0..n as u8).filter(|&v| colors[v as usize] == target).collect();
        let mut explored: Vec<u8> = Vec::with_capacity(members.len());
        for &v in &members {
            if !explored.is_empty() && self.equivalent_to_explored(v, &explored, path) {
                continue;
            }
            let mut child = colors;
            for (u, c) in child[..n].iter_mut().enumerate() {
                if *c > target {
                    *c += 1;
                } else if *c == target && u != v as usize {
                    *c = target + 1;
                }
            }
            path.push(v);
            self.explore(child, path);
            path.pop();
            explored.push(v);
        }
    }

    fn leaf(&mut self, colors: &Colors) {
        let n = self.n;
        let mut order = [0u8; MAX_NODES];
        for v in 0..n {
            order[colors[v] as usize] = v as u8;
        }
        let mut serial = Vec::with_capacity(n + n * n + 2);
        for &v in &order[..n] {
            serial.push(self.cg.node_colors[v as usize]);
        }
        for p in 0..n {
            for q in 0..n {
                serial.push(self.cg.arcs[order[p] as usize * n + order[q] as usize]);
            }
        }
        match self.marked_positions(colors) {
            (a, b) => {
                serial.push(a);
                serial.push(b);
            }
        }
        match &self.best {
            None => self.best = Some((serial, order)),
            Some((best, best_order)) => match serial.cmp(best) {
                std::cmp::Ordering::Less => self.best = Some((serial, order)),
                std::cmp::Ordering::Equal => {
                    let mut gamma = [0u8; MAX_NODES];
                    for p in 0..n {
                        gamma[order[p] as usize] = best_order[p];
                    }
                    if (0..n).any(|v| gamma[v] as usize != v) {
                        self.automorphisms.push(gamma);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }

    fn marked_positions(&self, colors: &Colors) -> (u32, u32) {
        match self.cg.marked {
            Marked::Node(v) => (colors[v] as u32, u32::MAX),
            Marked::Edge(a, b) => {
                let (pa, pb) = (colors[a] as u32, colors[b] as u32);
                if self.cg.directed {
                    (pa, pb)
                } else {
                    (pa.min(pb), pa.max(pb))
                }
            }
        }
    }

    /// Whether `v` lies in the orbit of an explored sibling under the group
    /// generated by known automorphisms that fix the current path pointwise.
    fn equivalent_to_explored(&self, v: u8, explored: &[u8], path: &[u8]) -> bool {
        let n = self.n;
        let mut parent: Colors = [0; MAX_NODES];
        for (i, p) in parent[..n].iter_mut().enumerate() {
            *p = i as u8;
        }
        fn find(parent: &mut Colors, mut x: u8) -> u8 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        for gamma in &self.automorphisms {
            if path.iter().any(|&p| gamma[p as usize] != p) {
                continue;
            }
            for x in 0..n as u8 {
                let (a, b) = (find(&mut parent, x), find(&mut parent, gamma[x as usize]));
                if a != b {
                    parent[a as usize] = b;
                }
            }
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&w| find(&mut parent, w) == root)
    }
}

fn count_cells(colors: &Colors, n: usize) -> usize {
    let mut seen = [false; MAX_NODES];
    let mut cells = 0;
    for &c in &colors[..n] {
        if !seen[c as usize] {
            seen[c as usize] = true;
            cells += 1;
        }
    }
    cells
}
