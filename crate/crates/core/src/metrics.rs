//! Ranking metrics, the 3-hop candidate set and baseline scorers.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::graph::{Graph, HopMetric, NodeId};

/// One scored candidate pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scored {
    pub source: NodeId,
    pub target: NodeId,
    pub score: f64,
    pub positive: bool,
}

fn class_counts(scored: &[Scored]) -> (usize, usize) {
    let p = scored.iter().filter(|s| s.positive).count();
    (p, scored.len() - p)
}

fn check_scores(scored: &[Scored]) -> Result<()> {
    if scored.iter().any(|s| s.score.is_nan()) {
        return Err(invalid_arg("NaN score"));
    }
    Ok(())
}

/// Area under the ROC curve as the Mann-Whitney statistic; a tied
/// positive/negative pair counts one half.
pub fn auc(scored: &[Scored]) -> Result<f64> {
    check_scores(scored)?;
    let (p, n) = class_counts(scored);
    if p == 0 || n == 0 {
        return Err(invalid_arg("AUC needs at least one positive and one negative"));
    }
    let mut order: Vec<&Scored> = scored.iter().collect();
    order.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap());
    // sum of mid-ranks of positives (1-based)
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].score == order[i].score {
            j += 1;
        }
        let mid = (i + 1 + j) as f64 / 2.0;
        let pos = order[i..j].iter().filter(|s| s.positive).count();
        rank_sum += mid * pos as f64;
        i = j;
    }
    let (p, n) = (p as f64, n as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// A point of the precision-recall curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrPoint {
    pub tp: f64,
    pub fp: f64,
    pub recall: f64,
    pub precision: f64,
    /// False for points reached by some score threshold.
    pub interpolated: bool,
}

/// Precision-recall curve with Davis-Goadrich interpolation between
/// achievable points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrCurve {
    pub positives: usize,
    pub points: Vec<PrPoint>,
    pub area: f64,
}

impl PrCurve {
    pub fn achievable(&self) -> impl Iterator<Item = &PrPoint> {
        self.points.iter().filter(|p| !p.interpolated)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "recall,precision,tp,fp,interpolated")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{},{}", p.recall, p.precision, p.tp, p.fp, p.interpolated)?;
        }
        Ok(())
    }
}

/// Cumulative (tp, fp) after each distinct score threshold, highest score
/// first, starting at (0, 0). Tied candidates form a single step.
pub fn threshold_points(scored: &[Scored]) -> Vec<(usize, usize)> {
    let mut order: Vec<&Scored> = scored.iter().collect();
    order.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
    let mut out = vec![(0, 0)];
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].score == order[i].score {
            if order[j].positive {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        out.push((tp, fp));
        i = j;
    }
    out
}

fn precision(tp: f64, fp: f64) -> f64 {
    if tp + fp == 0.0 {
        0.0
    } else {
        tp / (tp + fp)
    }
}

/// Exact area under precision as a function of recall along one segment
/// where the false-positive count grows linearly with the true-positive
/// count: `fp(x) = fa + s*(x - ta)` for `x` in `[ta, tb]`.
fn segment_area(ta: f64, fa: f64, tb: f64, fb: f64, positives: f64) -> f64 {
    if tb <= ta {
        return 0.0;
    }
    let s = (fb - fa) / (tb - ta);
    let a = 1.0 + s;
    let b = fa - s * ta;
    // precision(x) = x / (a*x + b)
    let integral = if b == 0.0 {
        (tb - ta) / a
    } else {
        let f = |x: f64| x / a - b / (a * a) * (a * x + b).ln();
        f(tb) - f(ta)
    };
    integral / positives
}

/// Precision-recall curve and its area. Between consecutive achievable
/// points the false-positive count is interpolated linearly in the
/// true-positive count, giving intermediate points at each integer
/// true-positive count; the area integrates the resulting precision exactly.
/// The first segment starts at the origin with the precision of its end
/// point.
pub fn aupr_davis_goadrich(scored: &[Scored]) -> Result<PrCurve> {
    check_scores(scored)?;
    let (p, _) = class_counts(scored);
    if p == 0 {
        return Err(invalid_arg("AUPR needs at least one positive"));
    }
    let pf = p as f64;
    let steps = threshold_points(scored);
    let mut points = Vec::new();
    let mut area = 0.0;
    for w in steps.windows(2) {
        let ((ta, fa), (tb, fb)) = (w[0], w[1]);
        let (ta, fa, tb, fb) = (ta as f64, fa as f64, tb as f64, fb as f64);
        area += segment_area(ta, fa, tb, fb, pf);
        if tb > ta {
            let s = (fb - fa) / (tb - ta);
            let mut x = ta.floor() + 1.0;
            while x < tb {
                let fx = fa + s * (x - ta);
                points.push(PrPoint {
                    tp: x,
                    fp: fx,
                    recall: x / pf,
                    precision: precision(x, fx),
                    interpolated: true,
                });
                x += 1.0;
            }
        }
        points.push(PrPoint {
            tp: tb,
            fp: fb,
            recall: tb / pf,
            precision: precision(tb, fb),
            interpolated: false,
        });
    }
    Ok(PrCurve {
        positives: p,
        points,
        area,
    })
}

/// Trapezoidal area over the achievable points, with recall 0 assigned the
/// precision of the first threshold that recovers a positive.
pub fn trapezoid_aupr(scored: &[Scored]) -> Result<f64> {
    check_scores(scored)?;
    let (p, _) = class_counts(scored);
    if p == 0 {
        return Err(invalid_arg("AUPR needs at least one positive"));
    }
    let pf = p as f64;
    let steps = threshold_points(scored);
    let mut area = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    // thresholds with no positive sit at recall 0 and add no area
    for &(tp, fp) in steps.iter().filter(|s| s.0 > 0) {
        let (r, pr) = (tp as f64 / pf, precision(tp as f64, fp as f64));
        let (r0, p0) = prev.unwrap_or((0.0, pr));
        area += (r - r0) * (p0 + pr) / 2.0;
        prev = Some((r, pr));
    }
    Ok(area)
}

/// Candidate pairs for AUPR3 on `g_eval`: every non-edge within three
/// skeleton hops is a negative, and a test edge is a positive when its
/// endpoints stay within three hops once the edge itself is removed.
pub fn aupr3_candidates(g_eval: &Graph, test_edges: &[(NodeId, NodeId)]) -> Result<Vec<(NodeId, NodeId, bool)>> {
    let mut out: Vec<(NodeId, NodeId, bool)> = g_eval
        .within_k_hops(3, HopMetric::Skeleton)?
        .into_iter()
        .filter(|p| !p.is_edge)
        .map(|p| (p.u, p.v, false))
        .collect();
    for &(u, v) in test_edges {
        if !g_eval.has_edge(u, v) {
            return Err(invalid_arg(format!("test edge ({u}, {v}) is not in the graph")));
        }
        if g_eval.bounded_distance(u, v, 3, Some((u, v))).is_some() {
            out.push((u, v, true));
        }
    }
    Ok(out)
}

/// Shared neighbors. On directed graphs the four wedge orientations
/// through a common neighbor are summed.
pub fn common_neighbors_score(g: &Graph, u: NodeId, v: NodeId) -> usize {
    fn intersect(a: &[NodeId], b: &[NodeId]) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
    let (out_u, out_v) = (g.out_neighbors(u), g.out_neighbors(v));
    if !g.is_directed() {
        return intersect(out_u, out_v);
    }
    let (in_u, in_v) = (g.in_neighbors(u), g.in_neighbors(v));
    // u->w->v, u->w<-v, u<-w->v, u<-w<-v
    intersect(out_u, in_v) + intersect(out_u, out_v) + intersect(in_u, in_v) + intersect(in_u, out_v)
}

/// Seeded uniform scores in `[0, 1)`.
pub struct RandomScorer {
    rng: ChaCha8Rng,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        RandomScorer {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_score(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}
