//! Synthetic graph generators.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Undirected Barabási–Albert graph with preferential attachment.
///
/// Starts from a star on `n_edges + 1` nodes; each further node attaches to
/// `n_edges` distinct existing nodes drawn with probability proportional to
/// their degree. The result has exactly `(n - n_edges) * n_edges` edges and is
/// connected. Output is a deterministic function of `seed`.
pub fn barabasi_albert(n: usize, n_edges: usize, seed: u64) -> Result<Graph> {
    if n_edges < 1 || n_edges >= n {
        return Err(Error::param(format!(
            "Barabási–Albert requires 1 <= n_edges < n, got n={n}, n_edges={n_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity((n - n_edges) * n_edges);
    // One entry per edge endpoint: uniform draws from it are degree-proportional.
    let mut endpoints = Vec::with_capacity(2 * (n - n_edges) * n_edges);
    for leaf in 1..=n_edges {
        edges.push((0, leaf));
        endpoints.push(0);
        endpoints.push(leaf);
    }

    let mut targets = BTreeSet::new();
    for source in n_edges + 1..n {
        targets.clear();
        while targets.len() < n_edges {
            targets.insert(endpoints[rng.gen_range(0..endpoints.len())]);
        }
        for &t in &targets {
            edges.push((source, t));
            endpoints.push(t);
            endpoints.push(source);
        }
    }
    Graph::from_edges(n, &edges, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn connected(g: &Graph) -> bool {
        let mut seen = vec![false; g.node_count()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in g.out_neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    #[test]
    fn tree_case_average_degree() {
        let g = barabasi_albert(1000, 1, 7).unwrap();
        assert_eq!(g.edge_count(), 999);
        let avg = g.arc_count() as f64 / g.node_count() as f64;
        assert!((1.9..=2.0).contains(&avg), "avg degree {avg}");
        assert!(connected(&g));
    }

    #[test]
    fn boundary_is_a_star() {
        let g = barabasi_albert(5, 4, 1).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.nodes().all(|u| g.out_degree(u) >= 1));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = barabasi_albert(1000, 3, 42).unwrap();
        let b = barabasi_albert(1000, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = barabasi_albert(1000, 3, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(barabasi_albert(5, 5, 0).is_err());
        assert!(barabasi_albert(5, 0, 0).is_err());
    }

    #[test]
    fn heavy_tailed_and_connected() {
        for m in [3, 5, 11] {
            let g = barabasi_albert(1000, m, 0).unwrap();
            assert_eq!(g.edge_count(), (1000 - m) * m);
            assert!(connected(&g));
            let mut deg = g.out_degrees();
            deg.sort_unstable();
            let median = deg[deg.len() / 2];
            let max = *deg.last().unwrap();
            assert!(max > 3 * median, "m={m}: max {max}, median {median}");
        }
    }
}
