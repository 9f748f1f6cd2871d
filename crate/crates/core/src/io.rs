//! Edge-list ingestion, temporal bucketing, static splits and the key=value
//! config format.
//!
//! Edge-list lines hold whitespace- or comma-separated fields. Lines starting
//! with `#` or `%` are comments. A line with a single field declares a node,
//! `src dst` declares an edge and temporal files add a third integer
//! timestamp field. Node labels are mapped to dense ids in order of first
//! appearance. Gzip input is detected by its magic bytes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SstError};
use crate::graph::{Graph, NodeId};

/// Opens a file, transparently decompressing gzip.
pub fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    Ok(maybe_gzip(Box::new(file))?)
}

/// Wraps a reader, decompressing if it starts with the gzip magic bytes.
pub fn maybe_gzip(reader: Box<dyn Read>) -> std::io::Result<Box<dyn BufRead>> {
    let mut buf = BufReader::new(reader);
    let head = buf.fill_buf()?;
    if head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(buf))))
    } else {
        Ok(Box::new(buf))
    }
}

/// Fields of a record; a field starting a comment ends the record, so every
/// label read back from a written file is a label again.
fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|f| !f.is_empty())
        .take_while(|f| !f.starts_with(['#', '%']))
}

fn is_comment(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

#[derive(Default)]
struct LabelMap {
    ids: HashMap<String, NodeId>,
    labels: Vec<String>,
}

impl LabelMap {
    fn id(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_string());
        self.ids.insert(label.to_string(), id);
        id
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> SstError {
    SstError::Parse {
        line,
        message: message.into(),
    }
}

/// A loaded static graph plus ingestion statistics.
#[derive(Clone, Debug)]
pub struct StaticEdgeList {
    pub graph: Graph,
    /// Original label of each node id.
    pub labels: Vec<String>,
    pub self_loops: usize,
    pub duplicates: usize,
}

pub fn load_static(path: &Path, directed: bool) -> Result<StaticEdgeList> {
    read_static(open_maybe_gzip(path)?, directed)
}

/// Parses a static edge list; columns after the second are ignored.
pub fn read_static(reader: impl BufRead, directed: bool) -> Result<StaticEdgeList> {
    let mut map = LabelMap::default();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let (mut self_loops, mut duplicates) = (0, 0);
    for line in reader.lines() {
        let line = line?;
        if is_comment(&line) {
            continue;
        }
        let mut f = fields(&line);
        let Some(a) = f.next() else { continue };
        let u = map.id(a);
        let Some(b) = f.next() else { continue };
        let v = map.id(b);
        if u == v {
            self_loops += 1;
            continue;
        }
        let key = if directed || u < v { (u, v) } else { (v, u) };
        if !seen.insert(key) {
            duplicates += 1;
            continue;
        }
        edges.push(key);
    }
    if self_loops > 0 || duplicates > 0 {
        log::warn!("dropped {self_loops} self-loops and {duplicates} duplicate edges");
    }
    let graph = Graph::from_edges(directed, map.labels.len(), &edges)?;
    Ok(StaticEdgeList {
        graph,
        labels: map.labels,
        self_loops,
        duplicates,
    })
}

/// Writes node declarations followed by edges, so reading the output back
/// reproduces node ids and isolated nodes. Dead node slots are not written.
pub fn write_static(graph: &Graph, labels: Option<&[String]>, mut out: impl Write) -> Result<()> {
    let name = |v: NodeId| match labels {
        Some(l) => l[v as usize].clone(),
        None => v.to_string(),
    };
    writeln!(
        out,
        "# {} graph: {} nodes, {} edges",
        if graph.is_directed() { "directed" } else { "undirected" },
        graph.node_count(),
        graph.edge_count()
    )?;
    for v in graph.nodes() {
        writeln!(out, "{}", name(v))?;
    }
    for (u, v) in graph.edges() {
        writeln!(out, "{} {}", name(u), name(v))?;
    }
    Ok(())
}

/// One timestamped interaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub source: NodeId,
    pub target: NodeId,
    pub time: i64,
}

/// Interactions sorted by time (stable with respect to input order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalEdgeStream {
    pub directed: bool,
    pub interactions: Vec<Interaction>,
    /// Original label of each node id.
    pub labels: Vec<String>,
    pub self_loops: usize,
}

impl TemporalEdgeStream {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }
}

pub fn load_temporal(path: &Path, directed: bool) -> Result<TemporalEdgeStream> {
    read_temporal(open_maybe_gzip(path)?, directed)
}

pub fn read_temporal(reader: impl BufRead, directed: bool) -> Result<TemporalEdgeStream> {
    let mut map = LabelMap::default();
    let mut interactions = Vec::new();
    let mut self_loops = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if is_comment(&line) {
            continue;
        }
        let f: Vec<&str> = fields(&line).collect();
        match f.len() {
            0 => {}
            1 => {
                map.id(f[0]);
            }
            2 => return Err(parse_err(i + 1, "missing timestamp")),
            _ => {
                let time: i64 = f[2]
                    .parse()
                    .map_err(|_| parse_err(i + 1, format!("bad timestamp {:?}", f[2])))?;
                let (u, v) = (map.id(f[0]), map.id(f[1]));
                if u == v {
                    self_loops += 1;
                    continue;
                }
                interactions.push(Interaction {
                    source: u,
                    target: v,
                    time,
                });
            }
        }
    }
    if self_loops > 0 {
        log::warn!("dropped {self_loops} self-loop interactions");
    }
    interactions.sort_by_key(|x| x.time);
    Ok(TemporalEdgeStream {
        directed,
        interactions,
        labels: map.labels,
        self_loops,
    })
}

pub fn write_temporal(stream: &TemporalEdgeStream, mut out: impl Write) -> Result<()> {
    writeln!(
        out,
        "# {} temporal stream: {} nodes, {} interactions",
        if stream.directed { "directed" } else { "undirected" },
        stream.node_count(),
        stream.len()
    )?;
    for label in &stream.labels {
        writeln!(out, "{label}")?;
    }
    for x in &stream.interactions {
        writeln!(
            out,
            "{} {} {}",
            stream.labels[x.source as usize], stream.labels[x.target as usize], x.time
        )?;
    }
    Ok(())
}

/// A squashed interaction: `weight` counts its occurrences within a bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    /// Zero-based bucket index; it replaces the original timestamps.
    pub index: usize,
    /// Distinct edges in order of first occurrence within the bucket.
    pub edges: Vec<WeightedEdge>,
    /// Number of raw interactions in the bucket.
    pub interactions: usize,
}

/// Splits the stream into `tau` buckets of consecutive interactions. With
/// `n = q*tau + r` interactions the first `r` buckets hold `q + 1` and the
/// rest hold `q`. Repeats within a bucket are squashed into one weighted
/// edge; undirected pairs are squashed regardless of orientation.
pub fn bucket_stream(stream: &TemporalEdgeStream, tau: usize) -> Result<Vec<Bucket>> {
    let n = stream.len();
    if tau == 0 || n < tau {
        return Err(invalid_arg(format!("cannot split {n} interactions into {tau} buckets")));
    }
    let (q, r) = (n / tau, n % tau);
    let mut buckets = Vec::with_capacity(tau);
    let mut start = 0;
    for index in 0..tau {
        let size = q + usize::from(index < r);
        let mut pos: HashMap<(NodeId, NodeId), usize> = HashMap::new();
        let mut edges: Vec<WeightedEdge> = Vec::new();
        for x in &stream.interactions[start..start + size] {
            let key = if stream.directed || x.source < x.target {
                (x.source, x.target)
            } else {
                (x.target, x.source)
            };
            match pos.get(&key) {
                Some(&i) => edges[i].weight += 1,
                None => {
                    pos.insert(key, edges.len());
                    edges.push(WeightedEdge {
                        source: x.source,
                        target: x.target,
                        weight: 1,
                    });
                }
            }
        }
        buckets.push(Bucket {
            index,
            edges,
            interactions: size,
        });
        start += size;
    }
    Ok(buckets)
}

/// Train/validation/test edge partition; nodes are shared by all three.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train: Vec<(NodeId, NodeId)>,
    pub validation: Vec<(NodeId, NodeId)>,
    pub test: Vec<(NodeId, NodeId)>,
}

impl EdgeSplit {
    /// Graph with the same node slots as `g` holding only the training edges.
    pub fn train_graph(&self, g: &Graph) -> Result<Graph> {
        let mut out = Graph::with_nodes(g.is_directed(), g.slot_count());
        for v in 0..g.slot_count() as NodeId {
            if !g.contains_node(v) {
                out.apply_change(&crate::graph::GraphChange::NodeDeletion { node: v })
                    .map(|_| ())?;
            }
        }
        for &(u, v) in &self.train {
            out.add_edge(u, v)?;
        }
        Ok(out)
    }
}

/// Seeded uniform edge partition. Validation and test sizes are the rounded
/// fractions of the edge count; training takes the rest.
pub fn split_static(g: &Graph, fractions: [f64; 3], seed: u64) -> Result<EdgeSplit> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(invalid_arg(format!("split fractions {fractions:?} must sum to 1")));
    }
    let mut edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let m = edges.len();
    let n_val = (fractions[1] * m as f64).round() as usize;
    let n_test = (fractions[2] * m as f64).round() as usize;
    if n_val + n_test > m {
        return Err(invalid_arg("split sizes exceed the edge count"));
    }
    let n_train = m - n_val - n_test;
    for (f, size, name) in [
        (fractions[0], n_train, "train"),
        (fractions[1], n_val, "validation"),
        (fractions[2], n_test, "test"),
    ] {
        if f > 0.0 && size == 0 {
            return Err(invalid_arg(format!("{name} split is empty for {m} edges")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let test = edges.split_off(m - n_test);
    let validation = edges.split_off(n_train);
    Ok(EdgeSplit {
        train: edges,
        validation,
        test,
    })
}

/// Parses `key = value` lines; `#` starts a comment. Later keys override
/// earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(i + 1, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty()
            || !k
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.')
        {
            return Err(parse_err(i + 1, format!("bad key {k:?}")));
        }
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}
