//! Linear max-margin classifier over sparse count vectors.
//!
//! Training minimizes `0.5*|w|^2 + C * sum(hinge)` by stochastic
//! subgradient descent (Pegasos step sizes with `lambda = 1 / (C * n)`) on
//! standardized features. The bias is an extra constant feature that is
//! regularized like the others. The returned weights are the average of the
//! iterates over the second half of the epochs.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

/// A sparse row: `(column, value)` pairs with distinct columns.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 50,
            seed: 0,
        }
    }
}

/// Trained linear model. Weights apply to standardized features
/// `(x - mean) / scale`; columns are named by label strings so a model can
/// be reused with a different label registry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub config: SvmConfig,
    /// Training rows with a nonzero count, per feature and class.
    pub positive_occurrences: Vec<u64>,
    pub negative_occurrences: Vec<u64>,
}

impl LinearModel {
    /// Decision value of a row given in this model's column order.
    pub fn decision(&self, row: &[(usize, f64)]) -> f64 {
        let mut score = self.bias;
        // centered part is the same for every row: -sum(w * mean / scale)
        for (j, w) in self.weights.iter().enumerate() {
            score -= w * self.means[j] / self.scales[j];
        }
        for &(j, x) in row {
            score += self.weights[j] * x / self.scales[j];
        }
        score
    }

    /// Decision value of a row keyed by label strings; unknown labels are
    /// ignored (their weight is zero).
    pub fn decision_named<'a>(&self, row: impl IntoIterator<Item = (&'a str, f64)>) -> f64 {
        let index = self.index();
        let sparse: SparseRow = row
            .into_iter()
            .filter_map(|(h, x)| index.get(h).map(|&j| (j, x)))
            .collect();
        self.decision(&sparse)
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.features.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect()
    }

    /// Weight vector scaled to unit Euclidean norm (bias excluded).
    pub fn unit_weights(&self) -> Vec<f64> {
        let norm = self.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return self.weights.clone();
        }
        self.weights.iter().map(|w| w / norm).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: LinearModel = serde_json::from_str(text)?;
        let d = m.features.len();
        if [
            m.weights.len(),
            m.means.len(),
            m.scales.len(),
            m.positive_occurrences.len(),
            m.negative_occurrences.len(),
        ]
        .iter()
        .any(|&l| l != d)
        {
            return Err(invalid_arg("model arrays disagree in length"));
        }
        if m.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid_arg("model scales must be positive"));
        }
        if m.weights.iter().chain(&m.means).any(|x| !x.is_finite()) || !m.bias.is_finite() {
            return Err(invalid_arg("model values must be finite"));
        }
        Ok(m)
    }
}

/// Trains on rows over `features.len()` columns; `labels[i]` is true for the
/// positive class.
pub fn svm_train(features: Vec<String>, rows: &[SparseRow], labels: &[bool], cfg: SvmConfig) -> Result<LinearModel> {
    let n = rows.len();
    let d = features.len();
    if labels.len() != n {
        return Err(invalid_arg("one label per row is required"));
    }
    if !labels.iter().any(|&y| y) || labels.iter().all(|&y| y) {
        return Err(invalid_arg("training data needs both classes"));
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) || cfg.epochs == 0 {
        return Err(invalid_arg("C must be positive and epochs nonzero"));
    }
    for row in rows {
        if row.iter().any(|&(j, x)| j >= d || !x.is_finite()) {
            return Err(invalid_arg("row has an out-of-range column or non-finite value"));
        }
    }

    let mut means = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let (mut pos_occ, mut neg_occ) = (vec![0u64; d], vec![0u64; d]);
    for (row, &y) in rows.iter().zip(labels) {
        for &(j, x) in row {
            means[j] += x;
            sq[j] += x * x;
            if x != 0.0 {
                if y {
                    pos_occ[j] += 1;
                } else {
                    neg_occ[j] += 1;
                }
            }
        }
    }
    let nf = n as f64;
    let mut scales = vec![1.0; d];
    for j in 0..d {
        means[j] /= nf;
        let var = (sq[j] / nf - means[j] * means[j]).max(0.0);
        if var > 1e-24 {
            scales[j] = var.sqrt();
        }
    }

    // Standardized row i is z = D x - u with D = diag(1/scale), u = D mean;
    // column d is the constant bias feature (u = 0 there).
    let u: Vec<f64> = (0..d).map(|j| means[j] / scales[j]).collect();
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let scaled: Vec<Vec<(usize, f64)>> = rows
        .iter()
        .map(|row| {
            let mut r: Vec<(usize, f64)> = row.iter().map(|&(j, x)| (j, x / scales[j])).collect();
            r.push((d, 1.0));
            r
        })
        .collect();
    let row_u: Vec<f64> = scaled
        .iter()
        .map(|r| r.iter().filter(|e| e.0 < d).map(|&(j, x)| x * u[j]).sum())
        .collect();

    let lambda = 1.0 / (cfg.c * nf);
    // w = s * (v - c_u * u), with v.u tracked incrementally
    let mut v = vec![0.0; d + 1];
    let mut s = 1.0f64;
    let mut cu = 0.0f64;
    let mut vu = 0.0f64;
    let mut avg = vec![0.0; d + 1];
    let mut averaged = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = if labels[i] { 1.0 } else { -1.0 };
            let r = &scaled[i];
            let vx: f64 = r.iter().map(|&(j, x)| v[j] * x).sum();
            // w.z = s * ((v - c u).(Dx) - (v - c u).u)
            let margin = y * s * (vx - cu * row_u[i] - vu + cu * uu);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|x| *x = 0.0);
                s = 1.0;
                cu = 0.0;
                vu = 0.0;
            } else {
                s *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y / s;
                for &(j, x) in r {
                    v[j] += step * x;
                    if j < d {
                        vu += step * x * u[j];
                    }
                }
                cu += step;
            }
            if s < 1e-9 {
                for j in 0..d {
                    v[j] = s * (v[j] - cu * u[j]);
                }
                v[d] *= s;
                vu = (0..d).map(|j| v[j] * u[j]).sum();
                cu = 0.0;
                s = 1.0;
            }
        }
        if epoch >= cfg.epochs / 2 {
            for j in 0..=d {
                let uj = if j < d { u[j] } else { 0.0 };
                avg[j] += s * (v[j] - cu * uj);
            }
            averaged += 1;
        }
    }
    let avg: Vec<f64> = avg.iter().map(|x| x / averaged as f64).collect();
    Ok(LinearModel {
        features,
        weights: avg[..d].to_vec(),
        bias: avg[d],
        means,
        scales,
        config: cfg,
        positive_occurrences: pos_occ,
        negative_occurrences: neg_occ,
    })
}
