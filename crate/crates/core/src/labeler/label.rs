//! Parsing and rendering of canonical label strings.
//!
//! A label string has five `;`-separated fields:
//!
//! ```text
//! <nodes>;<D|U>;<node tokens>;<edges>;<marked element>
//! ```
//!
//! Node tokens are comma-separated, one per canonical position, and are `.`
//! when no node trait is selected. A token is a `&`-joined list of
//! `name=value` (class trait), `name#r` (rank trait, dense rank `r`) entries;
//! a missing value is written `name=?` or `name#0`. Edges are `p-q` or `p>q`
//! with an optional `[token]`. The marked element is `n<p>` or `e<p>-<q>` /
//! `e<p>><q>`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::canon::{Marked, MAX_NODES};
use crate::error::{Result, SstError};
use crate::traits::is_label_token;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenValue {
    Class(String),
    Rank(u32),
    Missing { rank: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitToken {
    pub name: String,
    pub value: TokenValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDescription {
    pub from: usize,
    pub to: usize,
    pub traits: Vec<TraitToken>,
}

/// Structured form of a label string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SstDescription {
    pub directed: bool,
    pub nodes: Vec<Vec<TraitToken>>,
    pub edges: Vec<EdgeDescription>,
    pub marked: Marked,
}

fn label_err(msg: impl Into<String>) -> SstError {
    SstError::Label(msg.into())
}

fn parse_index(s: &str, n: usize) -> Result<usize> {
    if s.is_empty() || s.len() > 1 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(label_err(format!("bad position {s:?}")));
    }
    let p: usize = s.parse().unwrap();
    if p >= n {
        return Err(label_err(format!("position {p} out of range")));
    }
    Ok(p)
}

fn parse_token(s: &str) -> Result<Vec<TraitToken>> {
    if s == "." {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in s.split('&') {
        let token = if let Some((name, value)) = entry.split_once('=') {
            let value = if value == "?" {
                TokenValue::Missing { rank: false }
            } else if is_label_token(value) {
                TokenValue::Class(value.to_string())
            } else {
                return Err(label_err(format!("bad class value {value:?}")));
            };
            (name, value)
        } else if let Some((name, rank)) = entry.split_once('#') {
            let r: u32 = rank
                .parse()
                .ok()
                .filter(|_| rank.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| label_err(format!("bad rank {rank:?}")))?;
            let value = if r == 0 {
                TokenValue::Missing { rank: true }
            } else {
                TokenValue::Rank(r)
            };
            (name, value)
        } else {
            return Err(label_err(format!("bad trait entry {entry:?}")));
        };
        if !is_label_token(token.0) {
            return Err(label_err(format!("bad trait name {:?}", token.0)));
        }
        out.push(TraitToken {
            name: token.0.to_string(),
            value: token.1,
        });
    }
    Ok(out)
}

fn write_token(f: &mut fmt::Formatter<'_>, traits: &[TraitToken]) -> fmt::Result {
    for (i, t) in traits.iter().enumerate() {
        if i > 0 {
            f.write_str("&")?;
        }
        match &t.value {
            TokenValue::Class(v) => write!(f, "{}={}", t.name, v)?,
            TokenValue::Rank(r) => write!(f, "{}#{}", t.name, r)?,
            TokenValue::Missing { rank: false } => write!(f, "{}=?", t.name)?,
            TokenValue::Missing { rank: true } => write!(f, "{}#0", t.name)?,
        }
    }
    Ok(())
}

impl fmt::Display for TraitToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_token(f, std::slice::from_ref(self))
    }
}

impl SstDescription {
    /// Parses a label string. Only well-formed strings are accepted, and
    /// `parse(s)?.to_string() == s` for every accepted `s`.
    pub fn parse(label: &str) -> Result<Self> {
        let fields: Vec<&str> = label.split(';').collect();
        let [n, dir, nodes, edges, marked] = fields[..] else {
            return Err(label_err("expected five ';'-separated fields"));
        };
        let n: usize = match n {
            "1" | "2" | "3" | "4" | "5" | "6" | "7" | "8" | "9" => n.parse().unwrap(),
            _ => return Err(label_err(format!("bad node count {n:?}"))),
        };
        debug_assert!(n <= MAX_NODES);
        let directed = match dir {
            "D" => true,
            "U" => false,
            _ => return Err(label_err(format!("bad direction {dir:?}"))),
        };
        let node_tokens: Vec<&str> = nodes.split(',').collect();
        if node_tokens.len() != n {
            return Err(label_err("node token count does not match node count"));
        }
        let nodes = node_tokens.into_iter().map(parse_token).collect::<Result<Vec<_>>>()?;

        let sep = if directed { '>' } else { '-' };
        let mut parsed_edges: Vec<EdgeDescription> = Vec::new();
        if !edges.is_empty() {
            for e in edges.split(',') {
                let (pair, traits) = match e.find('[') {
                    Some(i) => {
                        let body = e[i + 1..]
                            .strip_suffix(']')
                            .ok_or_else(|| label_err(format!("unterminated edge token {e:?}")))?;
                        if body.is_empty() || body == "." {
                            return Err(label_err("empty edge token"));
                        }
                        (&e[..i], parse_token(body)?)
                    }
                    None => (e, Vec::new()),
                };
                let (a, b) = pair
                    .split_once(sep)
                    .ok_or_else(|| label_err(format!("bad edge {e:?}")))?;
                let (from, to) = (parse_index(a, n)?, parse_index(b, n)?);
                if from == to || (!directed && from > to) {
                    return Err(label_err(format!("non-canonical edge {e:?}")));
                }
                if let Some(prev) = parsed_edges.last() {
                    if (prev.from, prev.to) >= (from, to) {
                        return Err(label_err("edges out of order"));
                    }
                }
                parsed_edges.push(EdgeDescription { from, to, traits });
            }
        }

        let marked = if let Some(p) = marked.strip_prefix('n') {
            Marked::Node(parse_index(p, n)?)
        } else if let Some(pair) = marked.strip_prefix('e') {
            let (a, b) = pair
                .split_once(sep)
                .ok_or_else(|| label_err(format!("bad marked edge {marked:?}")))?;
            let (a, b) = (parse_index(a, n)?, parse_index(b, n)?);
            if !parsed_edges.iter().any(|e| (e.from, e.to) == (a, b)) {
                return Err(label_err("marked edge is not an edge"));
            }
            Marked::Edge(a, b)
        } else {
            return Err(label_err(format!("bad marked element {marked:?}")));
        };

        Ok(SstDescription {
            directed,
            nodes,
            edges: parsed_edges,
            marked,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Whether an arc `a -> b` exists (either orientation when undirected).
    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|e| (e.from == a && e.to == b) || (!self.directed && e.from == b && e.to == a))
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.from == v || (!self.directed && e.to == v))
            .count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.to == v || (!self.directed && e.from == v))
            .count()
    }

    /// Class value of an edge trait on the arc between `a` and `b`.
    pub fn edge_class(&self, a: usize, b: usize, name: &str) -> Option<&str> {
        let e = self
            .edges
            .iter()
            .find(|e| (e.from == a && e.to == b) || (!self.directed && e.from == b && e.to == a))?;
        e.traits.iter().find(|t| t.name == name).and_then(|t| match &t.value {
            TokenValue::Class(v) => Some(v.as_str()),
            _ => None,
        })
    }

    /// One-line English rendering of the structure.
    pub fn describe(&self) -> String {
        let arrow = if self.directed { "->" } else { "--" };
        let mut parts = Vec::new();
        for e in &self.edges {
            let mut s = format!("{}{}{}", e.from, arrow, e.to);
            if !e.traits.is_empty() {
                let traits: Vec<String> = e.traits.iter().map(|t| t.to_string()).collect();
                s.push_str(&format!(" ({})", traits.join(", ")));
            }
            if matches!(self.marked, Marked::Edge(a, b) if (a, b) == (e.from, e.to)) {
                s.push_str(" [changed]");
            }
            parts.push(s);
        }
        let mut text = format!(
            "{} nodes, {}; edges: {}",
            self.nodes.len(),
            if self.directed { "directed" } else { "undirected" },
            if parts.is_empty() {
                "none".to_string()
            } else {
                parts.join("; ")
            }
        );
        for (v, traits) in self.nodes.iter().enumerate() {
            if !traits.is_empty() {
                let list: Vec<String> = traits.iter().map(|t| t.to_string()).collect();
                text.push_str(&format!("; node {v}: {}", list.join(", ")));
            }
        }
        if let Marked::Node(v) = self.marked {
            text.push_str(&format!("; changed node {v}"));
        }
        text
    }

    /// Graphviz rendering; the changed element is drawn bold and red.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let (kind, arrow) = if self.directed {
            ("digraph", "->")
        } else {
            ("graph", "--")
        };
        out.push_str(&format!("{kind} \"{}\" {{\n", name.replace('"', "'")));
        for (v, traits) in self.nodes.iter().enumerate() {
            let mut label = v.to_string();
            for t in traits {
                label.push_str(&format!("\\n{t}"));
            }
            let style = if self.marked == Marked::Node(v) {
                ", color=red, penwidth=2"
            } else {
                ""
            };
            out.push_str(&format!("  n{v} [label=\"{label}\"{style}];\n"));
        }
        for e in &self.edges {
            let label: Vec<String> = e.traits.iter().map(|t| t.to_string()).collect();
            let mut attrs = Vec::new();
            if !label.is_empty() {
                attrs.push(format!("label=\"{}\"", label.join("\\n")));
            }
            if self.marked == Marked::Edge(e.from, e.to) {
                attrs.push("color=red, penwidth=2".to_string());
            }
            let attrs = if attrs.is_empty() {
                String::new()
            } else {
                format!(" [{}]", attrs.join(", "))
            };
            out.push_str(&format!("  n{} {arrow} n{}{attrs};\n", e.from, e.to));
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for SstDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};", self.nodes.len(), if self.directed { 'D' } else { 'U' })?;
        for (i, traits) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if traits.is_empty() {
                f.write_str(".")?;
            } else {
                write_token(f, traits)?;
            }
        }
        f.write_str(";")?;
        let sep = if self.directed { '>' } else { '-' };
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}{}{}", e.from, sep, e.to)?;
            if !e.traits.is_empty() {
                f.write_str("[")?;
                write_token(f, &e.traits)?;
                f.write_str("]")?;
            }
        }
        match self.marked {
            Marked::Node(v) => write!(f, ";n{v}"),
            Marked::Edge(a, b) => write!(f, ";e{a}{sep}{b}"),
        }
    }
}
