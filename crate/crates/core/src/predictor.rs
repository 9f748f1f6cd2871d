//! Static and temporal link prediction from SST count vectors.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::counter::{CountJob, CounterConfig, SstVector, TransitionCounter};
use crate::error::{invalid_arg, Result};
use crate::graph::{Graph, NodeId};
use crate::io::{bucket_stream, split_static, Bucket, TemporalEdgeStream};
use crate::labeler::{LabelId, LabelRegistry, SstDescription};
use crate::metrics::{
    auc, aupr3_candidates, aupr_davis_goadrich, common_neighbors_score, PrCurve, RandomScorer, Scored,
};
use crate::svm::{svm_train, LinearModel, SparseRow, SvmConfig};
use crate::traits::{DegreeDisambiguation, EdgeHistory, HookPhase, TemporalTraits, UpdaterPipeline};

/// Values of C tried when tuning on the validation split.
pub const C_GRID: [f64; 3] = [0.1, 1.0, 10.0];

/// Uniformly samples `count` distinct node pairs `(u, v)`, `u != v`, that
/// are not edges of `g` (unordered pairs when `g` is undirected).
pub fn sample_nonedges(g: &Graph, count: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_pairs(&nodes, g.is_directed(), count, g.edge_count(), &mut rng, |u, v| {
        g.has_edge(u, v)
    })
}

/// Uniform sample of distinct pairs over `nodes` avoiding pairs for which
/// `excluded` holds; `n_excluded` is the number of such pairs.
fn sample_pairs(
    nodes: &[NodeId],
    directed: bool,
    count: usize,
    n_excluded: usize,
    rng: &mut ChaCha8Rng,
    excluded: impl Fn(NodeId, NodeId) -> bool,
) -> Result<Vec<(NodeId, NodeId)>> {
    let n = nodes.len();
    let total = if directed {
        n * n.saturating_sub(1)
    } else {
        n * n.saturating_sub(1) / 2
    };
    let available = total.saturating_sub(n_excluded);
    if count > available {
        return Err(invalid_arg(format!(
            "asked for {count} non-edges but only {available} exist"
        )));
    }
    let normalize = |u: NodeId, v: NodeId| if directed || u < v { (u, v) } else { (v, u) };
    if count * 3 > available {
        // dense request: enumerate everything and take a random subset
        let mut all = Vec::with_capacity(available);
        for (i, &u) in nodes.iter().enumerate() {
            for (j, &v) in nodes.iter().enumerate() {
                if i == j || (!directed && j < i) || excluded(u, v) {
                    continue;
                }
                all.push(normalize(u, v));
            }
        }
        let (picked, _) = all.partial_shuffle(rng, count);
        let mut out = picked.to_vec();
        out.sort_unstable();
        return Ok(out);
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = nodes[rng.gen_range(0..n)];
        let v = nodes[rng.gen_range(0..n)];
        if u == v || excluded(u, v) {
            continue;
        }
        let key = normalize(u, v);
        if seen.insert(key) {
            out.push(key);
        }
    }
    Ok(out)
}

/// Settings of the static protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticConfig {
    pub k: usize,
    /// Sampled non-edges per training edge.
    pub alpha: usize,
    pub seed: u64,
    /// Train, validation and test fractions of the edges.
    pub fractions: [f64; 3],
    pub svm: SvmConfig,
    /// Pick C from [`C_GRID`] on the validation split.
    pub tune_c: bool,
    /// Uniform non-edges per test edge in the AUC candidate set.
    pub auc_negatives: usize,
    /// Also build the (large) three-hop candidate set and report AUPR3.
    pub aupr3: bool,
}

impl Default for StaticConfig {
    fn default() -> Self {
        StaticConfig {
            k: 3,
            alpha: 10,
            seed: 0,
            fractions: [0.85, 0.05, 0.10],
            svm: SvmConfig::default(),
            tune_c: false,
            auc_negatives: 10,
            aupr3: true,
        }
    }
}

impl StaticConfig {
    pub fn validate(&self) -> Result<()> {
        CounterConfig::new(self.k)?;
        if self.alpha == 0 || self.auc_negatives == 0 {
            return Err(invalid_arg("alpha and auc_negatives must be at least 1"));
        }
        if (self.fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid_arg("split fractions must sum to 1"));
        }
        Ok(())
    }
}

/// Settings of the temporal protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalConfig {
    pub k: usize,
    pub tau: usize,
    /// Buckets forming the training base graph; the next bucket supplies
    /// the training positives and the last bucket is the test bucket.
    pub base_buckets: usize,
    pub seed: u64,
    pub svm: SvmConfig,
    pub auc_negatives: usize,
    pub aupr3: bool,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig {
            k: 3,
            tau: 10,
            base_buckets: 8,
            seed: 0,
            svm: SvmConfig::default(),
            auc_negatives: 10,
            aupr3: true,
        }
    }
}

impl TemporalConfig {
    pub fn validate(&self) -> Result<()> {
        CounterConfig::new(self.k)?;
        if self.tau < 3 {
            return Err(invalid_arg("tau must be at least 3"));
        }
        if self.base_buckets == 0 || self.base_buckets >= self.tau - 1 {
            return Err(invalid_arg("base_buckets must be in 1..tau-1"));
        }
        if self.auc_negatives == 0 {
            return Err(invalid_arg("auc_negatives must be at least 1"));
        }
        Ok(())
    }
}

/// Evaluation summary written as `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub mode: String,
    pub k: usize,
    pub seed: u64,
    pub auc: f64,
    pub aupr3: Option<f64>,
    /// Positives and negatives of the AUC candidate set.
    pub n_pos: usize,
    pub n_neg: usize,
    pub aupr3_pos: usize,
    pub aupr3_neg: usize,
    pub runtime_s: f64,
    pub version: String,
    pub config: serde_json::Value,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One row of the interpretation table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpretationRow {
    pub rank: usize,
    /// Column of the SST in the model.
    pub label_id: usize,
    /// Component of the unit-normalized weight vector.
    pub weight: f64,
    pub label: String,
    pub decode: String,
    pub positive_occurrences: u64,
    pub negative_occurrences: u64,
}

/// SSTs ordered by decreasing weight magnitude; a positive weight marks
/// transitions that favor real edges.
pub fn interpret(model: &LinearModel) -> Vec<InterpretationRow> {
    let unit = model.unit_weights();
    let mut order: Vec<usize> = (0..unit.len()).collect();
    order.sort_by(|&a, &b| {
        unit[b]
            .abs()
            .partial_cmp(&unit[a].abs())
            .unwrap()
            .then_with(|| model.features[a].cmp(&model.features[b]))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(r, j)| InterpretationRow {
            rank: r + 1,
            label_id: j,
            weight: unit[j],
            label: model.features[j].clone(),
            decode: SstDescription::parse(&model.features[j])
                .map(|d| d.describe())
                .unwrap_or_else(|e| format!("undecodable: {e}")),
            positive_occurrences: model.positive_occurrences[j],
            negative_occurrences: model.negative_occurrences[j],
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_interpretation_csv(rows: &[InterpretationRow], mut out: impl Write) -> Result<()> {
    writeln!(
        out,
        "rank,label_id,weight,H,decode,positive_occurrences,negative_occurrences"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.rank,
            r.label_id,
            r.weight,
            csv_field(&r.label),
            csv_field(&r.decode),
            r.positive_occurrences,
            r.negative_occurrences
        )?;
    }
    Ok(())
}

/// Everything a prediction run produces.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub report: EvaluationReport,
    pub model: LinearModel,
    pub interpretation: Vec<InterpretationRow>,
    pub pr_curve: Option<PrCurve>,
}

/// Builds a training matrix whose columns are the sorted label strings seen
/// in `vectors`.
pub fn training_matrix(vectors: &[SstVector], registry: &LabelRegistry) -> (Vec<String>, Vec<SparseRow>) {
    let ids: BTreeSet<LabelId> = vectors.iter().flat_map(|v| v.entries.keys().copied()).collect();
    let mut named: Vec<(String, LabelId)> = ids
        .into_iter()
        .map(|id| (registry.get(id).expect("interned").to_string(), id))
        .collect();
    named.sort();
    let column: HashMap<LabelId, usize> = named.iter().enumerate().map(|(j, (_, id))| (*id, j)).collect();
    let rows = vectors
        .iter()
        .map(|v| {
            let mut row: SparseRow = v.entries.iter().map(|(id, &c)| (column[id], c as f64)).collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    (named.into_iter().map(|(h, _)| h).collect(), rows)
}

/// Decision values of count vectors under `model`.
pub fn score_vectors(model: &LinearModel, vectors: &[SstVector], registry: &LabelRegistry) -> Vec<f64> {
    let index = model.index();
    let mut column: HashMap<LabelId, Option<usize>> = HashMap::new();
    vectors
        .iter()
        .map(|v| {
            let row: SparseRow = v
                .entries
                .iter()
                .filter_map(|(id, &c)| {
                    let j = *column
                        .entry(*id)
                        .or_insert_with(|| registry.get(*id).and_then(|h| index.get(&*h).copied()));
                    j.map(|j| (j, c as f64))
                })
                .collect();
            model.decision(&row)
        })
        .collect()
}

fn scored(pairs: &[(NodeId, NodeId, bool)], scores: &[f64]) -> Vec<Scored> {
    pairs
        .iter()
        .zip(scores)
        .map(|(&(source, target, positive), &score)| Scored {
            source,
            target,
            score,
            positive,
        })
        .collect()
}

fn jobs_for(g: &Graph, pairs: &[(NodeId, NodeId, bool)]) -> Vec<CountJob> {
    pairs
        .iter()
        .map(|&(u, v, _)| {
            if g.has_edge(u, v) {
                CountJob::existing_edge(u, v)
            } else {
                CountJob::new_edge(u, v)
            }
        })
        .collect()
}

fn static_pipeline(g: &mut Graph) -> Result<UpdaterPipeline> {
    let mut pipeline = UpdaterPipeline::new();
    if !g.is_directed() {
        pipeline.push(Box::new(DegreeDisambiguation::install(g)?));
    }
    Ok(pipeline)
}

/// Vectors and labels of the static training set: every edge of `g_train`
/// counted as if just added (the edge is hidden first), followed by
/// `alpha` times as many sampled non-edges.
pub fn build_static_training_set(
    g_train: &Graph,
    k: usize,
    alpha: usize,
    seed: u64,
    registry: &LabelRegistry,
) -> Result<(Vec<SstVector>, Vec<bool>)> {
    let mut g = g_train.clone();
    let pipeline = static_pipeline(&mut g)?;
    let counter = TransitionCounter::new(&g, &CounterConfig::new(k)?, pipeline)?;
    let positives: Vec<(NodeId, NodeId)> = g.edges().collect();
    let negatives = sample_nonedges(&g, alpha * positives.len(), seed)?;
    let mut jobs: Vec<CountJob> = positives.iter().map(|&(u, v)| CountJob::existing_edge(u, v)).collect();
    jobs.extend(negatives.iter().map(|&(u, v)| CountJob::new_edge(u, v)));
    let vectors = counter.count_all(&g, &jobs, registry)?;
    let mut labels = vec![true; positives.len()];
    labels.resize(jobs.len(), false);
    Ok((vectors, labels))
}

/// Candidate sets of one static evaluation.
#[derive(Clone, Debug)]
pub struct StaticProtocol {
    pub g_train: Graph,
    pub g_eval: Graph,
    pub validation: Vec<(NodeId, NodeId)>,
    pub test: Vec<(NodeId, NodeId)>,
    /// Test edges plus uniform non-edges of the full graph.
    pub auc_set: Vec<(NodeId, NodeId, bool)>,
    /// Three-hop candidates, when requested.
    pub aupr3_set: Option<Vec<(NodeId, NodeId, bool)>>,
}

pub fn static_protocol(g: &Graph, cfg: &StaticConfig) -> Result<StaticProtocol> {
    cfg.validate()?;
    let split = split_static(g, cfg.fractions, cfg.seed)?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(invalid_arg("graph too small for a train/test split"));
    }
    let g_train = split.train_graph(g)?;
    let negatives = sample_nonedges(g, cfg.auc_negatives * split.test.len(), cfg.seed ^ 0xa0c)?;
    let mut auc_set: Vec<(NodeId, NodeId, bool)> = split.test.iter().map(|&(u, v)| (u, v, true)).collect();
    auc_set.extend(negatives.iter().map(|&(u, v)| (u, v, false)));
    let aupr3_set = if cfg.aupr3 {
        Some(aupr3_candidates(g, &split.test)?)
    } else {
        None
    };
    Ok(StaticProtocol {
        g_train,
        g_eval: g.clone(),
        validation: split.validation,
        test: split.test,
        auc_set,
        aupr3_set,
    })
}

/// Static link prediction: split, train on the training edges, evaluate on
/// the full graph with each candidate counted as if just added.
pub fn run_static_lp(dataset: &str, g: &Graph, cfg: &StaticConfig) -> Result<LpOutcome> {
    let start = Instant::now();
    let protocol = static_protocol(g, cfg)?;
    let registry = LabelRegistry::new();
    let (vectors, labels) = build_static_training_set(&protocol.g_train, cfg.k, cfg.alpha, cfg.seed, &registry)?;
    let (features, rows) = training_matrix(&vectors, &registry);

    let mut svm = SvmConfig {
        seed: cfg.seed,
        ..cfg.svm
    };
    if cfg.tune_c && !protocol.validation.is_empty() {
        svm.c = tune_c(&protocol, cfg, &features, &rows, &labels, svm, &registry)?;
    }
    let model = svm_train(features, &rows, &labels, svm)?;

    let mut g_eval = protocol.g_eval.clone();
    let pipeline = static_pipeline(&mut g_eval)?;
    let counter = TransitionCounter::new(&g_eval, &CounterConfig::new(cfg.k)?, pipeline)?;
    let score_set = |set: &[(NodeId, NodeId, bool)]| -> Result<Vec<Scored>> {
        let vecs = counter.count_all(&g_eval, &jobs_for(&g_eval, set), &registry)?;
        Ok(scored(set, &score_vectors(&model, &vecs, &registry)))
    };
    let auc_scored = score_set(&protocol.auc_set)?;
    let (aupr3, pr_curve, aupr3_pos, aupr3_neg) = match &protocol.aupr3_set {
        Some(set) if set.iter().any(|c| c.2) => {
            let s = score_set(set)?;
            let curve = aupr_davis_goadrich(&s)?;
            let pos = set.iter().filter(|c| c.2).count();
            (Some(curve.area), Some(curve), pos, set.len() - pos)
        }
        _ => (None, None, 0, 0),
    };
    let n_pos = protocol.test.len();
    let report = EvaluationReport {
        dataset: dataset.to_string(),
        mode: if g.is_directed() {
            "static-directed"
        } else {
            "static-undirected"
        }
        .into(),
        k: cfg.k,
        seed: cfg.seed,
        auc: auc(&auc_scored)?,
        aupr3,
        n_pos,
        n_neg: protocol.auc_set.len() - n_pos,
        aupr3_pos,
        aupr3_neg,
        runtime_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(StaticConfig { svm, ..cfg.clone() })?,
    };
    let interpretation = interpret(&model);
    Ok(LpOutcome {
        report,
        model,
        interpretation,
        pr_curve,
    })
}

fn tune_c(
    protocol: &StaticProtocol,
    cfg: &StaticConfig,
    features: &[String],
    rows: &[SparseRow],
    labels: &[bool],
    svm: SvmConfig,
    registry: &LabelRegistry,
) -> Result<f64> {
    // validation graph: training edges plus validation edges
    let mut g_val = protocol.g_train.clone();
    for &(u, v) in &protocol.validation {
        g_val.add_edge(u, v)?;
    }
    let negatives = sample_nonedges(&g_val, cfg.auc_negatives * protocol.validation.len(), cfg.seed ^ 0x7a1)?;
    let mut set: Vec<(NodeId, NodeId, bool)> = protocol.validation.iter().map(|&(u, v)| (u, v, true)).collect();
    set.extend(negatives.iter().map(|&(u, v)| (u, v, false)));
    let pipeline = static_pipeline(&mut g_val)?;
    let counter = TransitionCounter::new(&g_val, &CounterConfig::new(cfg.k)?, pipeline)?;
    let vecs = counter.count_all(&g_val, &jobs_for(&g_val, &set), registry)?;
    let mut best = (f64::NEG_INFINITY, svm.c);
    for c in C_GRID {
        let model = svm_train(features.to_vec(), rows, labels, SvmConfig { c, ..svm })?;
        let a = auc(&scored(&set, &score_vectors(&model, &vecs, registry)))?;
        log::info!("validation AUC {a:.4} at C = {c}");
        if a > best.0 {
            best = (a, c);
        }
    }
    Ok(best.1)
}

/// Baseline scores on the same candidate sets as [`run_static_lp`].
pub fn run_static_baselines(dataset: &str, g: &Graph, cfg: &StaticConfig) -> Result<Vec<EvaluationReport>> {
    let protocol = static_protocol(g, cfg)?;
    let mut reports = Vec::new();
    for name in ["common-neighbors", "random"] {
        let start = Instant::now();
        let mut rng = RandomScorer::new(cfg.seed ^ 0x5eed);
        let mut score = |set: &[(NodeId, NodeId, bool)]| -> Vec<Scored> {
            let scores: Vec<f64> = set
                .iter()
                .map(|&(u, v, _)| match name {
                    "random" => rng.next_score(),
                    _ => common_neighbors_score(&protocol.g_eval, u, v) as f64,
                })
                .collect();
            scored(set, &scores)
        };
        let auc_value = auc(&score(&protocol.auc_set))?;
        let (aupr3, p3, n3) = match &protocol.aupr3_set {
            Some(set) if set.iter().any(|c| c.2) => {
                let pos = set.iter().filter(|c| c.2).count();
                (Some(aupr_davis_goadrich(&score(set))?.area), pos, set.len() - pos)
            }
            _ => (None, 0, 0),
        };
        reports.push(EvaluationReport {
            dataset: dataset.to_string(),
            mode: format!(
                "static-{}-{name}",
                if g.is_directed() { "directed" } else { "undirected" }
            ),
            k: cfg.k,
            seed: cfg.seed,
            auc: auc_value,
            aupr3,
            n_pos: protocol.test.len(),
            n_neg: protocol.auc_set.len() - protocol.test.len(),
            aupr3_pos: p3,
            aupr3_neg: n3,
            runtime_s: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(cfg)?,
        });
    }
    Ok(reports)
}

/// Graph over all stream nodes holding the distinct edges of `buckets`.
fn union_graph(directed: bool, n: usize, buckets: &[Bucket]) -> Result<Graph> {
    let mut g = Graph::with_nodes(directed, n);
    for b in buckets {
        for e in &b.edges {
            if !g.has_edge(e.source, e.target) {
                g.add_edge(e.source, e.target)?;
            }
        }
    }
    Ok(g)
}

fn bucket_edge_set(directed: bool, bucket: &Bucket) -> Vec<(NodeId, NodeId)> {
    let mut set: Vec<(NodeId, NodeId)> = bucket
        .edges
        .iter()
        .map(|e| {
            if directed || e.source < e.target {
                (e.source, e.target)
            } else {
                (e.target, e.source)
            }
        })
        .collect();
    set.sort_unstable();
    set.dedup();
    set
}

fn nodes_seen(buckets: &[Bucket]) -> Vec<NodeId> {
    let set: BTreeSet<NodeId> = buckets
        .iter()
        .flat_map(|b| b.edges.iter().flat_map(|e| [e.source, e.target]))
        .collect();
    set.into_iter().collect()
}

/// SST vectors of `candidates` predicted for bucket `horizon`: the base
/// graph is the union of buckets before `horizon`, and edge recency and
/// frequency come from those buckets only. Later buckets are never read.
pub fn temporal_features(
    buckets: &[Bucket],
    horizon: usize,
    n_nodes: usize,
    directed: bool,
    k: usize,
    candidates: &[(NodeId, NodeId)],
    registry: &LabelRegistry,
) -> Result<Vec<SstVector>> {
    if horizon > buckets.len() {
        return Err(invalid_arg("horizon beyond the available buckets"));
    }
    let history = &buckets[..horizon];
    let mut base = union_graph(directed, n_nodes, history)?;
    let traits = TemporalTraits::install(&mut base, EdgeHistory::from_buckets(history, horizon, directed)?)?;
    let mut pipeline = UpdaterPipeline::new();
    pipeline.push(Box::new(traits));
    pipeline.run_batch(HookPhase::BeforeBatch, &mut base)?;
    let counter = TransitionCounter::new(&base, &CounterConfig::new(k)?, pipeline)?;
    let jobs: Vec<CountJob> = candidates
        .iter()
        .map(|&(u, v)| {
            if base.has_edge(u, v) {
                CountJob::existing_edge(u, v)
            } else {
                CountJob::new_edge(u, v)
            }
        })
        .collect();
    counter.count_all(&base, &jobs, registry)
}

/// Positives of bucket `t` and `factor` times as many uniformly sampled
/// pairs over the nodes seen up to bucket `t` that are not edges of bucket
/// `t`.
fn temporal_candidates(
    buckets: &[Bucket],
    t: usize,
    directed: bool,
    factor: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(NodeId, NodeId, bool)>> {
    let positives = bucket_edge_set(directed, &buckets[t]);
    let universe = nodes_seen(&buckets[..=t]);
    let pos_set: HashSet<(NodeId, NodeId)> = positives.iter().copied().collect();
    let negatives = sample_pairs(
        &universe,
        directed,
        factor * positives.len(),
        positives.len(),
        rng,
        |u, v| {
            let key = if directed || u < v { (u, v) } else { (v, u) };
            pos_set.contains(&key)
        },
    )?;
    let mut out: Vec<(NodeId, NodeId, bool)> = positives.iter().map(|&(u, v)| (u, v, true)).collect();
    out.extend(negatives.iter().map(|&(u, v)| (u, v, false)));
    Ok(out)
}

/// Temporal link prediction over `tau` count-based buckets. Training
/// predicts bucket `base_buckets` from the buckets before it (with as many
/// negatives as positives); testing predicts the last bucket from all
/// earlier ones. Edge weights are not used.
pub fn run_temporal_lp(dataset: &str, stream: &TemporalEdgeStream, cfg: &TemporalConfig) -> Result<LpOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let buckets = bucket_stream(stream, cfg.tau)?;
    let directed = stream.directed;
    let n = stream.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let registry = LabelRegistry::new();

    let train_t = cfg.base_buckets;
    let train_set = temporal_candidates(&buckets, train_t, directed, 1, &mut rng)?;
    let pairs: Vec<(NodeId, NodeId)> = train_set.iter().map(|c| (c.0, c.1)).collect();
    let vectors = temporal_features(&buckets, train_t, n, directed, cfg.k, &pairs, &registry)?;
    let labels: Vec<bool> = train_set.iter().map(|c| c.2).collect();
    let (features, rows) = training_matrix(&vectors, &registry);
    let svm = SvmConfig {
        seed: cfg.seed,
        ..cfg.svm
    };
    let model = svm_train(features, &rows, &labels, svm)?;

    let test_t = cfg.tau - 1;
    let auc_set = temporal_candidates(&buckets, test_t, directed, cfg.auc_negatives, &mut rng)?;
    let score_set = |set: &[(NodeId, NodeId, bool)]| -> Result<Vec<Scored>> {
        let pairs: Vec<(NodeId, NodeId)> = set.iter().map(|c| (c.0, c.1)).collect();
        let vecs = temporal_features(&buckets, test_t, n, directed, cfg.k, &pairs, &registry)?;
        Ok(scored(set, &score_vectors(&model, &vecs, &registry)))
    };
    let auc_value = auc(&score_set(&auc_set)?)?;
    let (aupr3, pr_curve, p3, n3) = if cfg.aupr3 {
        let set = temporal_aupr3_set(&buckets, test_t, directed, n)?;
        if set.iter().any(|c| c.2) {
            let curve = aupr_davis_goadrich(&score_set(&set)?)?;
            let pos = set.iter().filter(|c| c.2).count();
            (Some(curve.area), Some(curve), pos, set.len() - pos)
        } else {
            (None, None, 0, 0)
        }
    } else {
        (None, None, 0, 0)
    };
    let n_pos = auc_set.iter().filter(|c| c.2).count();
    let report = EvaluationReport {
        dataset: dataset.to_string(),
        mode: if directed {
            "temporal-directed"
        } else {
            "temporal-undirected"
        }
        .into(),
        k: cfg.k,
        seed: cfg.seed,
        auc: auc_value,
        aupr3,
        n_pos,
        n_neg: auc_set.len() - n_pos,
        aupr3_pos: p3,
        aupr3_neg: n3,
        runtime_s: start.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(TemporalConfig { svm, ..cfg.clone() })?,
    };
    let interpretation = interpret(&model);
    Ok(LpOutcome {
        report,
        model,
        interpretation,
        pr_curve,
    })
}

/// Three-hop candidates for bucket `t`: the evaluation graph is the union
/// of buckets up to `t`. Pairs within three hops that are not bucket-`t`
/// edges are negatives; a bucket-`t` edge is a positive when its endpoints
/// stay within three hops without it.
pub fn temporal_aupr3_set(
    buckets: &[Bucket],
    t: usize,
    directed: bool,
    n_nodes: usize,
) -> Result<Vec<(NodeId, NodeId, bool)>> {
    let g_eval = union_graph(directed, n_nodes, &buckets[..=t])?;
    let positives = bucket_edge_set(directed, &buckets[t]);
    let pos_set: HashSet<(NodeId, NodeId)> = positives.iter().copied().collect();
    let mut out: Vec<(NodeId, NodeId, bool)> = g_eval
        .within_k_hops(3, crate::graph::HopMetric::Skeleton)?
        .into_iter()
        .filter(|p| !pos_set.contains(&(p.u, p.v)))
        .map(|p| (p.u, p.v, false))
        .collect();
    for (u, v) in positives {
        if g_eval.bounded_distance(u, v, 3, Some((u, v))).is_some() {
            out.push((u, v, true));
        }
    }
    Ok(out)
}

/// Baselines on the temporal test bucket with the same candidate sets.
pub fn run_temporal_baselines(
    dataset: &str,
    stream: &TemporalEdgeStream,
    cfg: &TemporalConfig,
) -> Result<Vec<EvaluationReport>> {
    cfg.validate()?;
    let buckets = bucket_stream(stream, cfg.tau)?;
    let directed = stream.directed;
    let n = stream.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // draw the training candidates first so the test sample matches run_temporal_lp
    temporal_candidates(&buckets, cfg.base_buckets, directed, 1, &mut rng)?;
    let test_t = cfg.tau - 1;
    let auc_set = temporal_candidates(&buckets, test_t, directed, cfg.auc_negatives, &mut rng)?;
    let aupr3_set = if cfg.aupr3 {
        Some(temporal_aupr3_set(&buckets, test_t, directed, n)?)
    } else {
        None
    };
    let base = union_graph(directed, n, &buckets[..test_t])?;
    let mut reports = Vec::new();
    for name in ["common-neighbors", "random"] {
        let start = Instant::now();
        let mut rs = RandomScorer::new(cfg.seed ^ 0x5eed);
        let mut score = |set: &[(NodeId, NodeId, bool)]| -> Vec<Scored> {
            let s: Vec<f64> = set
                .iter()
                .map(|&(u, v, _)| match name {
                    "random" => rs.next_score(),
                    _ => common_neighbors_score(&base, u, v) as f64,
                })
                .collect();
            scored(set, &s)
        };
        let auc_value = auc(&score(&auc_set))?;
        let (aupr3, p3, n3) = match &aupr3_set {
            Some(set) if set.iter().any(|c| c.2) => {
                let pos = set.iter().filter(|c| c.2).count();
                (Some(aupr_davis_goadrich(&score(set))?.area), pos, set.len() - pos)
            }
            _ => (None, 0, 0),
        };
        let n_pos = auc_set.iter().filter(|c| c.2).count();
        reports.push(EvaluationReport {
            dataset: dataset.to_string(),
            mode: format!("temporal-{}-{name}", if directed { "directed" } else { "undirected" }),
            k: cfg.k,
            seed: cfg.seed,
            auc: auc_value,
            aupr3,
            n_pos,
            n_neg: auc_set.len() - n_pos,
            aupr3_pos: p3,
            aupr3_neg: n3,
            runtime_s: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(cfg)?,
        });
    }
    Ok(reports)
}
