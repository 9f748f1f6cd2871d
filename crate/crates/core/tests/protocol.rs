mod common;

use common::*;
use sst_core::generators::barabasi_albert_stream;
use sst_core::predictor::{
    run_static_baselines, run_static_lp, run_temporal_lp, static_protocol, StaticConfig, TemporalConfig,
};
use sst_core::svm::SvmConfig;
use sst_core::Graph;

fn small_static() -> Graph {
    let mut r = rng(21);
    gnp(60, 0.08, false, &mut r)
}

fn quick_static() -> StaticConfig {
    StaticConfig {
        alpha: 3,
        svm: SvmConfig {
            epochs: 10,
            ..SvmConfig::default()
        },
        ..StaticConfig::default()
    }
}

#[test]
fn static_runs_are_reproducible() {
    let g = small_static();
    let cfg = quick_static();
    let a = run_static_lp("g", &g, &cfg).unwrap();
    let b = run_static_lp("g", &g, &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!((a.report.auc, a.report.aupr3), (b.report.auc, b.report.aupr3));
    assert_eq!(a.interpretation, b.interpretation);
    let other = run_static_lp("g", &g, &StaticConfig { seed: 1, ..cfg }).unwrap();
    assert_ne!(a.model, other.model);
}

#[test]
fn static_training_graph_excludes_held_out_edges() {
    let g = small_static();
    let p = static_protocol(&g, &quick_static()).unwrap();
    assert_eq!(
        p.g_train.edge_count() + p.validation.len() + p.test.len(),
        g.edge_count()
    );
    for &(u, v) in p.validation.iter().chain(&p.test) {
        assert!(!p.g_train.has_edge(u, v));
        assert!(p.g_eval.has_edge(u, v));
    }
    let positives = p.auc_set.iter().filter(|c| c.2).count();
    assert_eq!(positives, p.test.len());
    assert_eq!(p.auc_set.len() - positives, 10 * p.test.len());
    assert!(p.auc_set.iter().filter(|c| !c.2).all(|&(u, v, _)| !g.has_edge(u, v)));
}

#[test]
fn static_random_baseline_is_near_half() {
    let g = small_static();
    let reports = run_static_baselines("g", &g, &quick_static()).unwrap();
    let random = reports.iter().find(|r| r.mode.contains("random")).unwrap();
    // 10 test positives only, so the band is wide
    assert!((random.auc - 0.5).abs() < 0.25, "{}", random.auc);
    let cn = reports.iter().find(|r| r.mode.contains("common")).unwrap();
    assert!(cn.auc >= 0.0 && cn.auc <= 1.0);
}

#[test]
fn temporal_features_never_read_later_buckets() {
    for (seed, directed) in [(1u64, true), (2, false)] {
        let mut s = barabasi_albert_stream(150, 2, seed).unwrap();
        s.directed = directed;
        for horizon in [3, 8] {
            let checked = leakage_check(&s, 10, horizon, 3, seed).unwrap();
            assert!(checked > 0);
        }
    }
}

#[test]
fn temporal_runs_are_reproducible() {
    let s = barabasi_albert_stream(150, 2, 4).unwrap();
    let cfg = TemporalConfig {
        aupr3: false,
        ..TemporalConfig::default()
    };
    let a = run_temporal_lp("ba", &s, &cfg).unwrap();
    let b = run_temporal_lp("ba", &s, &cfg).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.report.auc, b.report.auc);
    assert_eq!(a.report.n_neg, 10 * a.report.n_pos);
}
