//! Louvain community detection on the symmetrized graph.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Community id of every node, ids dense from 0.
    pub assignment: Vec<usize>,
    /// Node count of every community.
    pub sizes: Vec<usize>,
}

impl CommunityPartition {
    /// Renumbers raw labels densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let id = *map.entry(l).or_insert_with(|| {
                    sizes.push(0);
                    sizes.len() - 1
                });
                sizes[id] += 1;
                id
            })
            .collect();
        CommunityPartition { assignment, sizes }
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    /// Members of every community, ascending.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.sizes.len()];
        for (u, &c) in self.assignment.iter().enumerate() {
            out[c].push(u);
        }
        out
    }
}

/// Weighted undirected graph used at each Louvain level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn from_graph(graph: &Graph) -> Self {
        let n = graph.node_count();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v) in graph.arcs() {
            // Symmetrize: each unordered pair counts once with weight 1.
            if !graph.has_edge(v, u) || u < v {
                adj[u].push((v, 1.0));
                adj[v].push((u, 1.0));
            }
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Level {
            adj,
            self_loops: vec![0.0; n],
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[u]
    }
}

const MAX_SWEEPS: usize = 100;
const MIN_GAIN: f64 = 1e-12;

/// Louvain modularity optimisation (resolution 1). Directed arcs are
/// symmetrized. The node sweep order at every level is shuffled with a
/// generator seeded by `seed`, so the output is a function of the seed.
pub fn detect_communities(graph: &Graph, seed: u64) -> Result<CommunityPartition> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut membership: Vec<usize> = (0..n).collect();

    loop {
        let (community, moved) = local_moving(&level, &mut rng);
        if !moved {
            break;
        }
        let (renumbered, count) = renumber(&community);
        for m in membership.iter_mut() {
            *m = renumbered[*m];
        }
        level = aggregate(&level, &renumbered, count);
        if count == 1 {
            break;
        }
    }
    Ok(CommunityPartition::from_labels(&membership))
}

fn local_moving(level: &Level, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.len();
    let degree: Vec<f64> = (0..n).map(|u| level.degree(u)).collect();
    let m2: f64 = degree.iter().sum();
    let mut community: Vec<usize> = (0..n).collect();
    if m2 == 0.0 {
        return (community, false);
    }
    let mut total: Vec<f64> = degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;
    for _ in 0..MAX_SWEEPS {
        let mut moved = false;
        for &u in &order {
            let own = community[u];
            touched.clear();
            for &(v, w) in &level.adj[u] {
                let c = community[v];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[own] -= degree[u];
            let gain = |c: usize, link_c: f64| link_c - total[c] * degree[u] / m2;
            let mut best = own;
            let mut best_gain = gain(own, link[own]);
            for &c in &touched {
                let g = gain(c, link[c]);
                if g > best_gain + MIN_GAIN {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += degree[u];
            if best != own {
                community[u] = best;
                moved = true;
                moved_any = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
        }
        if !moved {
            break;
        }
    }
    (community, moved_any)
}

fn renumber(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for &c in community {
        if map[c] == usize::MAX {
            map[c] = next;
            next += 1;
        }
    }
    (community.iter().map(|&c| map[c]).collect(), next)
}

fn aggregate(level: &Level, community: &[usize], count: usize) -> Level {
    let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
    let mut self_loops = vec![0.0; count];
    for u in 0..level.len() {
        let cu = community[u];
        self_loops[cu] += level.self_loops[u];
        for &(v, w) in &level.adj[u] {
            let cv = community[v];
            if cu == cv {
                // Each internal edge is seen from both endpoints.
                self_loops[cu] += w / 2.0;
            } else {
                *weights[cu].entry(cv).or_insert(0.0) += w;
            }
        }
    }
    Level {
        adj: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
        self_loops,
    }
}

/// Modularity of `assignment` on the symmetrized graph.
pub fn modularity(graph: &Graph, assignment: &[usize]) -> f64 {
    let level = Level::from_graph(graph);
    let m2: f64 = (0..level.len()).map(|u| level.degree(u)).sum();
    if m2 == 0.0 {
        return 0.0;
    }
    let count = assignment.iter().max().map_or(0, |&c| c + 1);
    let mut internal = vec![0.0; count];
    let mut total = vec![0.0; count];
    for u in 0..level.len() {
        total[assignment[u]] += level.degree(u);
        for &(v, w) in &level.adj[u] {
            if assignment[u] == assignment[v] {
                internal[assignment[u]] += w;
            }
        }
    }
    internal
        .iter()
        .zip(&total)
        .map(|(&i, &t)| i / m2 - (t / m2) * (t / m2))
        .sum()
}
