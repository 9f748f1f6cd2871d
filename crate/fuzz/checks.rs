//! Bodies of the fuzz targets, shared with the corpus replay test in
//! `crates/core/tests/fuzz_corpus.rs`. Each must return normally on any input.

use sst_core::io::{bucket_stream, maybe_gzip, parse_config, read_static, read_temporal, write_static};
use sst_core::labeler::SstDescription;
use sst_core::svm::LinearModel;

pub fn static_edges(data: &[u8]) {
    for directed in [false, true] {
        let Ok(list) = read_static(data, directed) else {
            continue;
        };
        // whatever parses must survive a write/read round trip
        let mut out = Vec::new();
        write_static(&list.graph, Some(&list.labels), &mut out).unwrap();
        let again = read_static(out.as_slice(), directed).unwrap();
        assert_eq!(again.labels.len(), list.labels.len());
        assert_eq!(again.graph.edge_count(), list.graph.edge_count());
    }
    if let Ok(reader) = maybe_gzip(Box::new(std::io::Cursor::new(data.to_vec()))) {
        let _ = read_static(reader, false);
    }
}

pub fn temporal_edges(data: &[u8]) {
    for directed in [false, true] {
        if let Ok(stream) = read_temporal(data, directed) {
            for tau in [1, 3, 10] {
                let _ = bucket_stream(&stream, tau);
            }
        }
    }
}

pub fn config(data: &[u8]) {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_config(text);
    }
}

pub fn sst_label(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = SstDescription::parse(text) {
        let _ = d.describe();
        let _ = d.to_dot("fuzz");
    }
}

pub fn model_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = LinearModel::from_json(text) {
        let _ = sst_core::predictor::interpret(&model);
    }
}
