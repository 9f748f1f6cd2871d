//! Seeded preferential-attachment interaction streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_arg, Result};
use crate::graph::NodeId;
use crate::io::{Interaction, TemporalEdgeStream};

/// Barabasi-Albert growth as a directed stream. Nodes `0..m` start
/// isolated; node `m` links to all of them, and every later node `t` links
/// to `m` distinct earlier nodes drawn with probability proportional to
/// their total degree. Each arrival's edges point from the new node and
/// share timestamp `t`.
pub fn barabasi_albert_stream(n: usize, m: usize, seed: u64) -> Result<TemporalEdgeStream> {
    if m == 0 || n <= m {
        return Err(invalid_arg(format!("need n > m >= 1, got n = {n}, m = {m}")));
    }
    if n > NodeId::MAX as usize {
        return Err(invalid_arg("too many nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interactions = Vec::with_capacity((n - m) * m);
    // every edge endpoint once, so a uniform pick is degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * (n - m) * m);
    let mut chosen: Vec<NodeId> = Vec::with_capacity(m);
    for t in m..n {
        chosen.clear();
        if t == m {
            chosen.extend(0..m as NodeId);
        } else {
            while chosen.len() < m {
                let pick = endpoints[rng.gen_range(0..endpoints.len())];
                if !chosen.contains(&pick) {
                    chosen.push(pick);
                }
            }
        }
        for &target in &chosen {
            interactions.push(Interaction {
                source: t as NodeId,
                target,
                time: t as i64,
            });
            endpoints.push(t as NodeId);
            endpoints.push(target);
        }
    }
    Ok(TemporalEdgeStream {
        directed: true,
        interactions,
        labels: (0..n).map(|i| i.to_string()).collect(),
        self_loops: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_stream_forces_the_first_attachment() {
        let s = barabasi_albert_stream(3, 1, 9).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s.interactions[0].source, s.interactions[0].target), (1, 0));
        assert_eq!(s.interactions[1].source, 2);
        assert!(s.interactions[1].target < 2);
    }

    #[test]
    fn edge_count_and_out_degree() {
        let s = barabasi_albert_stream(200, 3, 1).unwrap();
        assert_eq!(s.len(), (200 - 3) * 3);
        for t in 3..200 {
            let mut targets: Vec<_> = s
                .interactions
                .iter()
                .filter(|x| x.source == t)
                .map(|x| x.target)
                .collect();
            assert_eq!(targets.len(), 3);
            targets.sort();
            targets.dedup();
            assert_eq!(targets.len(), 3);
            assert!(targets.iter().all(|&v| v < t));
        }
    }

    #[test]
    fn seeded_and_validated() {
        assert_eq!(
            barabasi_albert_stream(50, 2, 4).unwrap(),
            barabasi_albert_stream(50, 2, 4).unwrap()
        );
        assert!(barabasi_albert_stream(2, 2, 0).is_err());
        assert!(barabasi_albert_stream(5, 0, 0).is_err());
    }
}
