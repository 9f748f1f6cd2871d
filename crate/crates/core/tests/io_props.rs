mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Cursor, Write};

use common::*;
use flate2::write::GzEncoder;
use proptest::prelude::*;
use rand::Rng;
use sst_core::io::{
    bucket_stream, maybe_gzip, parse_config, read_static, read_temporal, split_static, write_static, write_temporal,
    Interaction, TemporalEdgeStream,
};
use sst_core::{Graph, NodeId};

fn labelled_edges(g: &Graph, labels: &[String]) -> BTreeSet<(String, String)> {
    g.edges()
        .map(|(u, v)| {
            let (a, b) = (labels[u as usize].clone(), labels[v as usize].clone());
            if g.is_directed() || a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

fn random_stream(seed: u64, directed: bool, n: usize, len: usize) -> TemporalEdgeStream {
    let mut r = rng(seed);
    let mut interactions: Vec<Interaction> = (0..len)
        .map(|_| {
            let s = r.gen_range(0..n as NodeId);
            let mut t = r.gen_range(0..n as NodeId - 1);
            if t >= s {
                t += 1;
            }
            Interaction {
                source: s,
                target: t,
                time: r.gen_range(-50..50),
            }
        })
        .collect();
    interactions.sort_by_key(|x| x.time);
    TemporalEdgeStream {
        directed,
        interactions,
        labels: (0..n).map(|i| format!("n{}", i * 7 % n)).collect(),
        self_loops: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn static_write_read_round_trip(seed in any::<u64>(), directed in any::<bool>(), gz in any::<bool>()) {
        let mut r = rng(seed);
        // sparse enough to leave isolated nodes
        let g = gnp(15, 0.08, directed, &mut r);
        let labels: Vec<String> = (0..15).map(|i| format!("v{}", (i * 11) % 15)).collect();
        let mut text = Vec::new();
        write_static(&g, Some(&labels), &mut text).unwrap();
        let bytes = if gz {
            let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::fast());
            enc.write_all(&text).unwrap();
            enc.finish().unwrap()
        } else {
            text
        };
        let back = read_static(maybe_gzip(Box::new(Cursor::new(bytes))).unwrap(), directed).unwrap();
        prop_assert_eq!(back.graph.node_count(), 15);
        prop_assert_eq!(&back.labels, &labels);
        prop_assert_eq!(labelled_edges(&back.graph, &back.labels), labelled_edges(&g, &labels));
        prop_assert_eq!(back.duplicates + back.self_loops, 0);
    }

    #[test]
    fn temporal_write_read_round_trip(seed in any::<u64>(), directed in any::<bool>()) {
        let s = random_stream(seed, directed, 12, 80);
        let mut text = Vec::new();
        write_temporal(&s, &mut text).unwrap();
        let back = read_temporal(Cursor::new(text), directed).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn buckets_partition_the_stream(seed in any::<u64>(), directed in any::<bool>(), len in 10usize..200, tau in 1usize..10) {
        let s = random_stream(seed, directed, 9, len);
        let buckets = bucket_stream(&s, tau).unwrap();
        prop_assert_eq!(buckets.len(), tau);
        let sizes: Vec<usize> = buckets.iter().map(|b| b.interactions).collect();
        prop_assert_eq!(sizes.iter().sum::<usize>(), len);
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1] && w[0] - w[1] <= 1));
        let mut start = 0;
        for (i, b) in buckets.iter().enumerate() {
            prop_assert_eq!(b.index, i);
            let mut expected: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
            for x in &s.interactions[start..start + b.interactions] {
                let key = if directed { (x.source, x.target) } else { (x.source.min(x.target), x.source.max(x.target)) };
                *expected.entry(key).or_insert(0) += 1;
            }
            let got: BTreeMap<(NodeId, NodeId), u32> = b
                .edges
                .iter()
                .map(|e| {
                    let key = if directed { (e.source, e.target) } else { (e.source.min(e.target), e.source.max(e.target)) };
                    (key, e.weight)
                })
                .collect();
            prop_assert_eq!(got.len(), b.edges.len(), "an edge appears twice in one bucket");
            prop_assert_eq!(got, expected);
            start += b.interactions;
        }
    }

    #[test]
    fn splits_partition_the_edges(seed in any::<u64>(), directed in any::<bool>()) {
        let mut r = rng(seed);
        let g = gnp(30, 0.2, directed, &mut r);
        let m = g.edge_count();
        let split = split_static(&g, [0.85, 0.05, 0.10], seed).unwrap();
        prop_assert_eq!(split.test.len(), (0.10 * m as f64).round() as usize);
        prop_assert_eq!(split.validation.len(), (0.05 * m as f64).round() as usize);
        let all: BTreeSet<_> = split.train.iter().chain(&split.validation).chain(&split.test).copied().collect();
        prop_assert_eq!(all.len(), m);
        prop_assert_eq!(all, g.edges().collect::<BTreeSet<_>>());
        let train = split.train_graph(&g).unwrap();
        prop_assert_eq!(train.node_count(), g.node_count());
        prop_assert_eq!(train.edge_count(), split.train.len());
        prop_assert!(split.test.iter().all(|&(u, v)| !train.has_edge(u, v)));
    }
}

#[test]
fn config_parsing() {
    let c = parse_config("# run\nk = 4\nname = \"eu core\" # trailing\n\nk=3\n").unwrap();
    assert_eq!(c["k"], "3");
    assert_eq!(c["name"], "eu core");
    assert!(parse_config("just words\n").is_err());
    assert!(parse_config("bad key = 1\n").is_err());
}

#[test]
fn temporal_rejects_missing_timestamps() {
    let err = read_temporal(Cursor::new("a b 1\nc d\n"), true).unwrap_err();
    assert_eq!(err.kind(), "parse");
}
