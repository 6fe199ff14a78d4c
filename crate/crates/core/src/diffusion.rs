//! Influence spread under the Independent Cascade and Weighted Cascade models.
//!
//! Four evaluators live here:
//!
//! * [`estimate_spread`]: Monte Carlo cascades, optionally truncated after a
//!   fixed number of frontier expansions (MC max-hop).
//! * [`exact_spread`]: live-edge enumeration, the ground truth for tests.
//! * [`one_hop_spread`] and [`two_hop_spread`]: closed-form approximations.
//!
//! Every Monte Carlo simulation draws from its own ChaCha stream keyed by
//! `(master_seed, evaluation_id, simulation_index)`, so estimates do not depend
//! on the number of worker threads or on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Edge activation rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiffusionModel {
    /// Independent Cascade: every arc fires with the same probability `p`.
    Ic { p: f64 },
    /// Weighted Cascade: arc `u -> v` fires with probability `1 / indegree(v)`.
    Wc,
}

impl DiffusionModel {
    pub fn ic(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("IC probability {p} outside [0, 1]")));
        }
        Ok(DiffusionModel::Ic { p })
    }

    /// Probability on arc `u -> v`, assuming the arc exists.
    #[inline]
    pub fn edge_probability(&self, graph: &Graph, v: NodeId) -> f64 {
        match *self {
            DiffusionModel::Ic { p } => p,
            DiffusionModel::Wc => 1.0 / graph.in_degree(v) as f64,
        }
    }

    /// Probability on `u -> v`, or zero when there is no such arc.
    #[inline]
    fn arc_probability(&self, graph: &Graph, u: NodeId, v: NodeId) -> f64 {
        if graph.has_edge(u, v) {
            self.edge_probability(graph, v)
        } else {
            0.0
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiffusionModel::Ic { .. } => "ic",
            DiffusionModel::Wc => "wc",
        }
    }
}

impl std::fmt::Display for DiffusionModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiffusionModel::Ic { p } => write!(f, "ic(p={p})"),
            DiffusionModel::Wc => f.write_str("wc"),
        }
    }
}

/// Activation probability of the arc `u -> v`.
pub fn activation_probability(model: &DiffusionModel, graph: &Graph, u: NodeId, v: NodeId) -> Result<f64> {
    if !graph.has_edge(u, v) {
        return Err(Error::NotAnEdge { from: u, to: v });
    }
    Ok(model.edge_probability(graph, v))
}

/// Mean, sample standard deviation and sample size of a spread evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub std: f64,
    pub n_simulations: usize,
}

impl SpreadEstimate {
    /// A point value with no sampling error.
    pub fn exact(value: f64) -> Self {
        SpreadEstimate {
            mean: value,
            std: 0.0,
            n_simulations: 0,
        }
    }

    /// Builds an estimate from exact integer moments of the samples.
    pub fn from_moments(n: usize, sum: u64, sum_sq: u128) -> Self {
        let mean = sum as f64 / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            // n * Σx² − (Σx)² is exact in integers and never negative.
            let n128 = n as u128;
            let num = n128 * sum_sq - (sum as u128) * (sum as u128);
            (num as f64 / (n as f64 * (n - 1) as f64)).sqrt()
        };
        SpreadEstimate {
            mean,
            std,
            n_simulations: n,
        }
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        if self.n_simulations == 0 {
            0.0
        } else {
            self.std / (self.n_simulations as f64).sqrt()
        }
    }
}

/// Identifies the family of RNG streams used by one spread evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub evaluation_id: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, evaluation_id: u64) -> Self {
        StreamKey {
            master_seed,
            evaluation_id,
        }
    }

    /// RNG for simulation number `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.evaluation_id.to_le_bytes());
        seed[16..24].copy_from_slice(b"cascade!");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}

/// Outcome of one simulated cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cascade {
    /// Final number of active nodes, seeds included.
    pub activated: usize,
    /// Frontier expansions that activated at least one node.
    pub depth: usize,
}

/// Reusable per-worker visited marks, reset in O(1) by bumping an epoch.
#[derive(Debug, Clone)]
pub struct CascadeScratch {
    stamp: Vec<u32>,
    epoch: u32,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl CascadeScratch {
    pub fn new(node_count: usize) -> Self {
        CascadeScratch {
            stamp: vec![0; node_count],
            epoch: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    #[inline]
    fn activate(&mut self, u: NodeId) -> bool {
        if self.stamp[u] == self.epoch {
            false
        } else {
            self.stamp[u] = self.epoch;
            true
        }
    }
}

/// Runs a single cascade from `seeds`.
///
/// Only nodes activated in the previous step try to activate their inactive
/// out-neighbours, each exactly once, succeeding when a fresh uniform draw is
/// below the arc probability. The cascade stops when no new node is activated
/// or after `max_hop` frontier expansions (`None` means no limit).
pub fn simulate_cascade<R: Rng>(
    graph: &Graph,
    model: &DiffusionModel,
    seeds: &[NodeId],
    max_hop: Option<usize>,
    rng: &mut R,
    scratch: &mut CascadeScratch,
) -> Cascade {
    scratch.reset();
    let mut frontier = std::mem::take(&mut scratch.frontier);
    let mut next = std::mem::take(&mut scratch.next);
    frontier.clear();
    for &s in seeds {
        if scratch.activate(s) {
            frontier.push(s);
        }
    }
    let mut activated = frontier.len();
    let mut depth = 0;
    let mut hop = 1;
    while !frontier.is_empty() && max_hop.is_none_or(|h| hop <= h) {
        next.clear();
        for &n in &frontier {
            for &m in graph.out_neighbors(n) {
                if scratch.stamp[m] == scratch.epoch {
                    continue;
                }
                let prob = model.edge_probability(graph, m);
                if rng.gen::<f64>() < prob {
                    scratch.activate(m);
                    next.push(m);
                }
            }
        }
        if !next.is_empty() {
            depth += 1;
            activated += next.len();
        }
        std::mem::swap(&mut frontier, &mut next);
        hop += 1;
    }
    scratch.frontier = frontier;
    scratch.next = next;
    Cascade { activated, depth }
}

pub(crate) fn validate_seeds(graph: &Graph, seeds: &[NodeId]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::InvalidSeedSet("empty seed set".into()));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(&bad) = sorted.iter().find(|&&s| s >= graph.node_count()) {
        return Err(Error::InvalidSeedSet(format!("node {bad} out of range")));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSeedSet("duplicate seeds".into()));
    }
    Ok(())
}

/// Monte Carlo spread estimate over `no_simulations` independent cascades,
/// simulations `0..no_simulations` of `key`.
pub fn estimate_spread(
    graph: &Graph,
    model: &DiffusionModel,
    seeds: &[NodeId],
    no_simulations: usize,
    max_hop: Option<usize>,
    key: StreamKey,
) -> Result<SpreadEstimate> {
    validate_seeds(graph, seeds)?;
    if no_simulations == 0 {
        return Err(Error::param("no_simulations must be at least 1"));
    }
    if max_hop == Some(0) {
        return Err(Error::param("max_hop must be at least 1"));
    }
    let (sum, sum_sq) = sample_moments(graph, model, seeds, max_hop, key, 0..no_simulations as u64);
    Ok(SpreadEstimate::from_moments(no_simulations, sum, sum_sq))
}

/// Exact integer first and second moments of the cascade sizes for the given
/// simulation indices. Integer accumulation keeps the result independent of
/// how rayon splits the range.
pub(crate) fn sample_moments(
    graph: &Graph,
    model: &DiffusionModel,
    seeds: &[NodeId],
    max_hop: Option<usize>,
    key: StreamKey,
    indices: std::ops::Range<u64>,
) -> (u64, u128) {
    (indices.start as usize..indices.end as usize)
        .into_par_iter()
        .with_min_len(16)
        .map_init(
            || CascadeScratch::new(graph.node_count()),
            |scratch, i| {
                let mut rng = key.rng(i as u64);
                let c = simulate_cascade(graph, model, seeds, max_hop, &mut rng, scratch);
                let x = c.activated as u64;
                (x, (x as u128) * (x as u128))
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Largest number of arcs [`exact_spread`] will enumerate.
pub const EXACT_ARC_CAP: usize = 22;

/// Expected spread by enumerating every live-arc subset.
///
/// Arcs with probability 0 or 1 are fixed, so only uncertain arcs multiply the
/// work. Refuses graphs with more than [`EXACT_ARC_CAP`] arcs.
pub fn exact_spread(graph: &Graph, model: &DiffusionModel, seeds: &[NodeId]) -> Result<f64> {
    validate_seeds(graph, seeds)?;
    if graph.arc_count() > EXACT_ARC_CAP {
        return Err(Error::TooManyEdges {
            edges: graph.arc_count(),
            cap: EXACT_ARC_CAP,
        });
    }
    let n = graph.node_count();
    let mut certain: Vec<(NodeId, NodeId)> = Vec::new();
    let mut uncertain: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (u, v) in graph.arcs() {
        let p = model.edge_probability(graph, v);
        if p >= 1.0 {
            certain.push((u, v));
        } else if p > 0.0 {
            uncertain.push((u, v, p));
        }
    }

    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut total = 0.0;
    for mask in 0u32..(1u32 << uncertain.len()) {
        let mut prob = 1.0;
        adj.iter_mut().for_each(Vec::clear);
        for &(u, v) in &certain {
            adj[u].push(v);
        }
        for (bit, &(u, v, p)) in uncertain.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                prob *= p;
                adj[u].push(v);
            } else {
                prob *= 1.0 - p;
            }
        }
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        let mut reached = 0usize;
        for &s in seeds {
            seen[s] = true;
            stack.push(s);
            reached += 1;
        }
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        total += prob * reached as f64;
    }
    Ok(total)
}

/// `1 + Σ_{c ∈ out(u)} p(u, c)`.
pub fn one_hop_spread(graph: &Graph, model: &DiffusionModel, u: NodeId) -> f64 {
    1.0 + graph
        .out_neighbors(u)
        .iter()
        .map(|&c| model.edge_probability(graph, c))
        .sum::<f64>()
}

/// Two-hop spread of a single node: `1 + Σ_{c ∈ out(s)} p(s, c)·(σ¹(c) − p(c, s))`.
///
/// The `p(c, s)` term removes the hop that would return to `s` itself.
pub fn two_hop_single(graph: &Graph, model: &DiffusionModel, s: NodeId) -> f64 {
    1.0 + graph
        .out_neighbors(s)
        .iter()
        .map(|&c| {
            model.edge_probability(graph, c)
                * (one_hop_spread(graph, model, c) - model.arc_probability(graph, c, s))
        })
        .sum::<f64>()
}

/// Two-hop spread approximation of a seed set.
///
/// Sums the per-seed two-hop spreads, then removes the contribution of seeds
/// reached directly from another seed and the two-hop paths `s -> c -> d`
/// that end on another seed `d`. The result is clamped below at `|S|`.
pub fn two_hop_spread(graph: &Graph, model: &DiffusionModel, seeds: &[NodeId]) -> Result<f64> {
    validate_seeds(graph, seeds)?;
    let mut in_set = vec![false; graph.node_count()];
    for &s in seeds {
        in_set[s] = true;
    }
    let mut total = 0.0;
    let mut seed_overlap = 0.0;
    let mut chi = 0.0;
    for &s in seeds {
        total += two_hop_single(graph, model, s);
        for &c in graph.out_neighbors(s) {
            let p_sc = model.edge_probability(graph, c);
            if in_set[c] {
                seed_overlap += p_sc
                    * (one_hop_spread(graph, model, c) - model.arc_probability(graph, c, s));
            } else {
                for &d in graph.out_neighbors(c) {
                    if d != s && in_set[d] {
                        chi += p_sc * model.edge_probability(graph, d);
                    }
                }
            }
        }
    }
    let value = total - seed_overlap - chi;
    Ok(value.max(seeds.len() as f64))
}

/// How a seed set's spread is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SpreadMethod {
    /// Full Monte Carlo.
    Mc { simulations: usize },
    /// Monte Carlo truncated after `max_hop` expansions.
    McMaxHop { simulations: usize, max_hop: usize },
    TwoHop,
    /// Live-edge enumeration; small graphs only.
    Exact,
}

impl SpreadMethod {
    pub fn evaluate(
        &self,
        graph: &Graph,
        model: &DiffusionModel,
        seeds: &[NodeId],
        key: StreamKey,
    ) -> Result<SpreadEstimate> {
        match *self {
            SpreadMethod::Mc { simulations } => estimate_spread(graph, model, seeds, simulations, None, key),
            SpreadMethod::McMaxHop { simulations, max_hop } => {
                estimate_spread(graph, model, seeds, simulations, Some(max_hop), key)
            }
            SpreadMethod::TwoHop => two_hop_spread(graph, model, seeds).map(SpreadEstimate::exact),
            SpreadMethod::Exact => exact_spread(graph, model, seeds).map(SpreadEstimate::exact),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SpreadMethod::Mc { simulations } => format!("mc:{simulations}"),
            SpreadMethod::McMaxHop { simulations, max_hop } => format!("mc-max-hop{max_hop}:{simulations}"),
            SpreadMethod::TwoHop => "two-hop".into(),
            SpreadMethod::Exact => "exact".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges, true).unwrap()
    }

    const KEY: StreamKey = StreamKey {
        master_seed: 11,
        evaluation_id: 3,
    };

    #[test]
    fn activation_probabilities() {
        let graph = g(5, &[(0, 4), (1, 4), (2, 4), (3, 4), (0, 1)]);
        let ic = DiffusionModel::ic(0.01).unwrap();
        assert_eq!(activation_probability(&ic, &graph, 0, 4).unwrap(), 0.01);
        assert_eq!(activation_probability(&ic, &graph, 0, 1).unwrap(), 0.01);
        let wc = DiffusionModel::Wc;
        assert_eq!(activation_probability(&wc, &graph, 2, 4).unwrap(), 0.25);
        assert_eq!(activation_probability(&wc, &graph, 0, 1).unwrap(), 1.0);
        assert!(matches!(
            activation_probability(&wc, &graph, 4, 0),
            Err(Error::NotAnEdge { from: 4, to: 0 })
        ));
        assert!(DiffusionModel::ic(1.5).is_err());
    }

    #[test]
    fn zero_probability_spreads_nothing() {
        let graph = g(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let ic = DiffusionModel::ic(0.0).unwrap();
        let est = estimate_spread(&graph, &ic, &[0, 2], 500, None, KEY).unwrap();
        assert_eq!(est.mean, 2.0);
        assert_eq!(est.std, 0.0);
        assert_eq!(est.n_simulations, 500);
    }

    #[test]
    fn unit_probability_reaches_everything_reachable() {
        let graph = g(6, &[(0, 1), (1, 2), (2, 3), (4, 5)]);
        let ic = DiffusionModel::ic(1.0).unwrap();
        let est = estimate_spread(&graph, &ic, &[0], 100, None, KEY).unwrap();
        assert_eq!(est.mean, 4.0);
        assert_eq!(est.std, 0.0);
    }

    #[test]
    fn single_edge_half_probability() {
        let graph = g(2, &[(0, 1)]);
        let ic = DiffusionModel::ic(0.5).unwrap();
        let n = 200_000;
        let est = estimate_spread(&graph, &ic, &[0], n, None, KEY).unwrap();
        let se = est.std / (n as f64).sqrt();
        assert!((est.mean - 1.5).abs() <= 3.0 * se, "{est:?}");
    }

    #[test]
    fn seed_validation() {
        let graph = g(3, &[(0, 1)]);
        let ic = DiffusionModel::ic(0.5).unwrap();
        assert!(matches!(
            estimate_spread(&graph, &ic, &[], 10, None, KEY),
            Err(Error::InvalidSeedSet(_))
        ));
        assert!(matches!(
            estimate_spread(&graph, &ic, &[1, 1], 10, None, KEY),
            Err(Error::InvalidSeedSet(_))
        ));
        assert!(estimate_spread(&graph, &ic, &[0], 10, Some(0), KEY).is_err());
        assert!(estimate_spread(&graph, &ic, &[0], 0, None, KEY).is_err());
    }

    #[test]
    fn exact_spread_examples() {
        let ic = DiffusionModel::ic(0.5).unwrap();
        assert_eq!(exact_spread(&g(2, &[(0, 1)]), &ic, &[0]).unwrap(), 1.5);
        assert_eq!(exact_spread(&g(3, &[(0, 1), (1, 2)]), &ic, &[0]).unwrap(), 1.75);
        let graph = g(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(exact_spread(&graph, &DiffusionModel::Wc, &[0, 1, 2, 3]).unwrap(), 4.0);
    }

    #[test]
    fn exact_spread_refuses_large_graphs() {
        let edges: Vec<_> = (0..23).map(|i| (i, i + 1)).collect();
        let graph = g(24, &edges);
        let ic = DiffusionModel::ic(0.5).unwrap();
        assert!(matches!(
            exact_spread(&graph, &ic, &[0]),
            Err(Error::TooManyEdges { edges: 23, .. })
        ));
    }

    #[test]
    fn one_hop_examples() {
        let graph = g(5, &[(0, 1), (0, 2), (0, 3)]);
        let ic = DiffusionModel::ic(0.1).unwrap();
        assert_abs_diff_eq!(one_hop_spread(&graph, &ic, 0), 1.3, epsilon = 1e-12);
        assert_eq!(one_hop_spread(&graph, &ic, 4), 1.0);

        // u=0 -> v=1 (indegree 2, also 2 -> 1), u=0 -> w=3 (indegree 1).
        let graph = g(4, &[(0, 1), (2, 1), (0, 3)]);
        assert_abs_diff_eq!(one_hop_spread(&graph, &DiffusionModel::Wc, 0), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn two_hop_single_seed_without_second_hop() {
        let graph = g(3, &[(0, 1), (0, 2)]);
        let ic = DiffusionModel::ic(0.1).unwrap();
        assert_abs_diff_eq!(two_hop_spread(&graph, &ic, &[0]).unwrap(), 1.2, epsilon = 1e-12);
    }

    #[test]
    fn two_hop_is_additive_on_disjoint_neighbourhoods() {
        let graph = g(8, &[(0, 1), (1, 2), (0, 3), (4, 5), (5, 6), (5, 7)]);
        let ic = DiffusionModel::ic(0.3).unwrap();
        let a = two_hop_spread(&graph, &ic, &[0]).unwrap();
        let b = two_hop_spread(&graph, &ic, &[4]).unwrap();
        let ab = two_hop_spread(&graph, &ic, &[0, 4]).unwrap();
        assert_abs_diff_eq!(ab, a + b, epsilon = 1e-12);
    }

    /// Independent evaluation of the two-hop formula on a hand-built graph,
    /// written term by term.
    #[test]
    fn two_hop_overlap_terms_by_hand() {
        // 0 = u, 1 = v, 2 = a, 3 = b, 4 = c.
        // u -> v, u -> a, a -> v, v -> b, b -> c, v -> u.
        let graph = g(5, &[(0, 1), (0, 2), (2, 1), (1, 3), (3, 4), (1, 0)]);
        let ic = DiffusionModel::ic(0.5).unwrap();
        let p = 0.5;
        // One-hop spreads: u has {v, a}, v has {b, u}, a has {v}, b has {c}.
        let s1_u = 1.0 + 2.0 * p;
        let s1_v = 1.0 + 2.0 * p;
        let s1_a = 1.0 + p;
        let s1_b = 1.0 + p;
        // Per-seed two-hop: u -> v (back-arc v -> u exists), u -> a (no back-arc).
        let hat_u = 1.0 + p * (s1_v - p) + p * s1_a;
        // v -> b (no back-arc), v -> u (back-arc u -> v exists).
        let hat_v = 1.0 + p * s1_b + p * (s1_u - p);
        // Seed-to-seed arcs: u -> v and v -> u.
        let overlap = p * (s1_v - p) + p * (s1_u - p);
        // χ: u -> a -> v is the only path through a non-seed ending on another seed.
        let chi = p * p;
        let expected = f64::max(hat_u + hat_v - overlap - chi, 2.0);
        let got = two_hop_spread(&graph, &ic, &[0, 1]).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-12);
        // With no paths beyond two hops, the exact spread only differs by
        // higher-order overlap; the approximation stays within the true range.
        let exact = exact_spread(&graph, &ic, &[0, 1]).unwrap();
        assert!((2.0..=5.0).contains(&got) && (got - exact).abs() < 0.5, "{got} vs {exact}");
    }

    #[test]
    fn two_hop_matches_exact_on_trees_of_depth_two() {
        // Out-tree of depth 2: the two-hop expansion is exact.
        let graph = g(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        for model in [DiffusionModel::ic(0.3).unwrap(), DiffusionModel::Wc] {
            let approx = two_hop_spread(&graph, &model, &[0]).unwrap();
            let exact = exact_spread(&graph, &model, &[0]).unwrap();
            assert_abs_diff_eq!(approx, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn depth_limited_cascade_is_prefix_of_unbounded() {
        let graph = crate::generators::barabasi_albert(300, 2, 5).unwrap();
        let mut scratch = CascadeScratch::new(graph.node_count());
        for i in 0..200 {
            let full = simulate_cascade(&graph, &DiffusionModel::Wc, &[0, 7], None, &mut KEY.rng(i), &mut scratch);
            let same = simulate_cascade(
                &graph,
                &DiffusionModel::Wc,
                &[0, 7],
                Some(full.depth.max(1)),
                &mut KEY.rng(i),
                &mut scratch,
            );
            assert_eq!(full, same);
            for h in 1..full.depth {
                let short =
                    simulate_cascade(&graph, &DiffusionModel::Wc, &[0, 7], Some(h), &mut KEY.rng(i), &mut scratch);
                let longer = simulate_cascade(
                    &graph,
                    &DiffusionModel::Wc,
                    &[0, 7],
                    Some(h + 1),
                    &mut KEY.rng(i),
                    &mut scratch,
                );
                assert!(short.activated <= longer.activated);
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_estimates() {
        let graph = crate::generators::barabasi_albert(500, 3, 1).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_spread(&graph, &DiffusionModel::Wc, &[1, 2, 3], 2000, None, KEY).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (2usize..7).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 1..10)
                .prop_map(move |edges| Graph::from_edges(n, &edges, true).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_spread_is_monotone(graph in small_graph(), p in 0.05f64..0.95) {
            let ic = DiffusionModel::ic(p).unwrap();
            for model in [ic, DiffusionModel::Wc] {
                for s in graph.nodes() {
                    let base = exact_spread(&graph, &model, &[s]).unwrap();
                    prop_assert!(base >= 1.0 - 1e-12 && base <= graph.node_count() as f64 + 1e-12);
                    for v in graph.nodes().filter(|&v| v != s) {
                        let more = exact_spread(&graph, &model, &[s, v]).unwrap();
                        prop_assert!(more + 1e-12 >= base);
                    }
                }
            }
        }

        #[test]
        fn samples_stay_in_bounds(graph in small_graph(), p in 0.0f64..=1.0, seed in any::<u64>()) {
            let ic = DiffusionModel::ic(p).unwrap();
            let mut scratch = CascadeScratch::new(graph.node_count());
            let key = StreamKey::new(seed, 0);
            for i in 0..50 {
                let c = simulate_cascade(&graph, &ic, &[0, 1], None, &mut key.rng(i), &mut scratch);
                prop_assert!(c.activated >= 2 && c.activated <= graph.node_count());
            }
        }

        #[test]
        fn two_hop_never_below_seed_count(graph in small_graph(), p in 0.0f64..=1.0) {
            let ic = DiffusionModel::ic(p).unwrap();
            let v = two_hop_spread(&graph, &ic, &[0, 1]).unwrap();
            prop_assert!(v.is_finite() && v >= 2.0);
        }
    }
}
