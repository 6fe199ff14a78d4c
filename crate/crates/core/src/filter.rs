//! Candidate-node filtering before the evolutionary search.
//!
//! Two filters are provided. [`filter_min_degree`] keeps nodes whose
//! out-degree reaches a threshold. [`filter_best_spread`] estimates the
//! single-node spread of every node with MC max-hop, tightening Student's t
//! confidence intervals round by round, and keeps the best nodes plus every
//! node whose interval still overlaps the weakest of them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{sample_moments, DiffusionModel, SpreadEstimate, StreamKey};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::stats::t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterStop {
    /// Degree filter; no iteration involved.
    Degree,
    /// The examined set is already no larger than the target count.
    SmallGraph,
    /// Surplus of incomparable nodes fell below the allowed range.
    RangeReached,
    /// The next error rate would be non-positive.
    ErrorRateExhausted,
    /// The simulation budget ran out; the report is partial.
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpread {
    pub node: NodeId,
    pub spread: SpreadEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    /// Retained nodes, ascending.
    pub retained: Vec<NodeId>,
    /// Spread statistics of every node examined at least once.
    pub spreads: Vec<NodeSpread>,
    pub iterations: usize,
    /// Relative confidence half-width reached in the last round.
    pub final_error_rate: f64,
    pub stop: FilterStop,
    /// Total single-node simulations run.
    pub simulations: u64,
}

impl FilterReport {
    pub fn complete(&self) -> bool {
        self.stop != FilterStop::BudgetExhausted
    }

    /// Retained nodes, or an error when fewer than `k` survived.
    pub fn candidates_for(&self, k: usize) -> Result<&[NodeId]> {
        if self.retained.len() < k {
            return Err(Error::param(format!(
                "filter retained {} nodes, fewer than k = {k}",
                self.retained.len()
            )));
        }
        Ok(&self.retained)
    }

    /// Same report keyed by original labels, for serialization.
    pub fn to_labeled(&self, graph: &Graph) -> LabeledFilterReport {
        LabeledFilterReport {
            retained: self.retained.iter().map(|&u| graph.label(u)).collect(),
            spreads: self
                .spreads
                .iter()
                .map(|s| LabeledSpread {
                    label: graph.label(s.node),
                    mean: s.spread.mean,
                    std: s.spread.std,
                    n_simulations: s.spread.n_simulations,
                })
                .collect(),
            iterations: self.iterations,
            final_error_rate: self.final_error_rate,
            stop: self.stop,
            simulations: self.simulations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSpread {
    pub label: u64,
    pub mean: f64,
    pub std: f64,
    pub n_simulations: usize,
}

/// On-disk form of a [`FilterReport`], consumed as a candidate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFilterReport {
    pub retained: Vec<u64>,
    pub spreads: Vec<LabeledSpread>,
    pub iterations: usize,
    pub final_error_rate: f64,
    pub stop: FilterStop,
    pub simulations: u64,
}

impl LabeledFilterReport {
    /// Dense indices of the retained labels, ascending.
    pub fn candidates(&self, graph: &Graph) -> Result<Vec<NodeId>> {
        let mut out = self
            .retained
            .iter()
            .map(|&l| {
                graph
                    .index_of(l)
                    .ok_or_else(|| Error::param(format!("candidate label {l} is not in the graph")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Keeps nodes with out-degree at least `threshold`.
pub fn filter_min_degree(graph: &Graph, threshold: usize) -> FilterReport {
    FilterReport {
        retained: graph.nodes().filter(|&u| graph.out_degree(u) >= threshold).collect(),
        spreads: Vec::new(),
        iterations: 0,
        final_error_rate: 0.0,
        stop: FilterStop::Degree,
        simulations: 0,
    }
}

/// Half-width of the two-sided Student's t confidence interval of a mean.
pub fn t_halfwidth(std: f64, n: usize, confidence: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param(format!("t interval needs n >= 2, got {n}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param(format!("confidence {confidence} outside (0, 1)")));
    }
    if std == 0.0 {
        return Ok(0.0);
    }
    let t = t_quantile((1.0 + confidence) / 2.0, (n - 1) as f64);
    Ok(t * std / (n as f64).sqrt())
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(n - k + i, i) here; the step to i + 1 divides exactly.
        let num = (n - k + i + 1) as u128;
        match acc.checked_mul(num) {
            Some(v) => acc = v / (i + 1) as u128,
            None => return u128::MAX,
        }
    }
    acc
}

/// Node-count targets derived from search-space bounds: the smallest `n`
/// with `C(n, k) >= lower` and the largest `n` with `C(n, k) <= upper`, both
/// capped at `node_count`.
pub fn retention_targets(k: usize, lower: f64, upper: f64, node_count: usize) -> (usize, usize) {
    let lower = lower.max(0.0).ceil() as u128;
    let upper = upper.max(0.0).floor() as u128;
    let (k64, cap) = (k as u64, node_count as u64);
    let mut target = k64;
    while target < cap && binomial(target, k64) < lower {
        target += 1;
    }
    let mut limit = k64;
    while limit < cap && binomial(limit + 1, k64) <= upper {
        limit += 1;
    }
    (target as usize, (limit as usize).max(target as usize))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestSpreadParams {
    pub initial_error_rate: f64,
    pub error_decrement: f64,
    /// Lower bound on the residual search space `C(n, k)`.
    pub space_lower: f64,
    /// Upper bound on the residual search space `C(n, k)`.
    pub space_upper: f64,
    pub batch_size: usize,
    pub max_hop: usize,
    pub confidence: f64,
    /// Per-node sample cap; a node hitting it stops sampling for the round.
    pub max_simulations_per_node: usize,
    /// Total simulation budget across all nodes and rounds.
    pub simulation_budget: Option<u64>,
    pub master_seed: u64,
}

impl Default for BestSpreadParams {
    fn default() -> Self {
        BestSpreadParams {
            initial_error_rate: 0.8,
            error_decrement: 0.1,
            space_lower: 1e9,
            space_upper: 1e11,
            batch_size: 30,
            max_hop: 2,
            confidence: 0.95,
            max_simulations_per_node: 100_000,
            simulation_budget: None,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: u64,
    sum_sq: u128,
}

impl Moments {
    fn estimate(&self) -> SpreadEstimate {
        SpreadEstimate::from_moments(self.n, self.sum, self.sum_sq)
    }
}

/// Iterative best-spread filter. See the module docs.
pub fn filter_best_spread(
    graph: &Graph,
    model: &DiffusionModel,
    k: usize,
    params: &BestSpreadParams,
) -> Result<FilterReport> {
    validate(params, k, graph)?;
    let (target, limit) = retention_targets(k, params.space_lower, params.space_upper, graph.node_count());
    let mut moments = vec![Moments::default(); graph.node_count()];
    let mut examined: Vec<NodeId> = graph.nodes().collect();
    let mut rate = params.initial_error_rate;
    let mut iterations = 0;
    let mut simulations = 0u64;

    let stop = loop {
        iterations += 1;
        let updates: Vec<(NodeId, Moments, u64)> = examined
            .par_iter()
            .map(|&u| {
                let mut m = moments[u];
                let before = m.n;
                sample_until(graph, model, u, &mut m, rate, params)?;
                Ok((u, m, (m.n - before) as u64))
            })
            .collect::<Result<_>>()?;
        for (u, m, used) in updates {
            moments[u] = m;
            simulations += used;
        }

        let mut ranked = examined.clone();
        ranked.sort_by(|&a, &b| {
            let (ma, mb) = (moments[a].estimate().mean, moments[b].estimate().mean);
            mb.partial_cmp(&ma).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        if ranked.len() <= target {
            examined = ranked;
            break FilterStop::SmallGraph;
        }
        let interval = |u: NodeId| -> Result<(f64, f64)> {
            let est = moments[u].estimate();
            let h = t_halfwidth(est.std, est.n_simulations, params.confidence)?;
            Ok((est.mean - h, est.mean + h))
        };
        let (weakest_low, _) = interval(ranked[target - 1])?;
        let mut kept = ranked[..target].to_vec();
        for &u in &ranked[target..] {
            if interval(u)?.1 >= weakest_low {
                kept.push(u);
            }
        }
        let surplus = kept.len() - target;
        examined = kept;

        if surplus < limit - target {
            break FilterStop::RangeReached;
        }
        if params.simulation_budget.is_some_and(|b| simulations >= b) {
            break FilterStop::BudgetExhausted;
        }
        let next = rate - params.error_decrement;
        if next <= 1e-9 {
            break FilterStop::ErrorRateExhausted;
        }
        rate = next;
    };

    examined.sort_unstable();
    Ok(FilterReport {
        spreads: graph
            .nodes()
            .filter(|&u| moments[u].n > 0)
            .map(|u| NodeSpread {
                node: u,
                spread: moments[u].estimate(),
            })
            .collect(),
        retained: examined,
        iterations,
        final_error_rate: rate,
        stop,
        simulations,
    })
}

fn validate(params: &BestSpreadParams, k: usize, graph: &Graph) -> Result<()> {
    if k == 0 || k > graph.node_count() {
        return Err(Error::param(format!("k = {k} outside 1..={}", graph.node_count())));
    }
    if !(params.initial_error_rate > 0.0) || !(params.error_decrement > 0.0) {
        return Err(Error::param("error rate and decrement must be positive"));
    }
    if !(params.space_lower < params.space_upper) {
        return Err(Error::param("space_lower must be below space_upper"));
    }
    if params.batch_size < 2 || params.max_hop == 0 {
        return Err(Error::param("batch_size must be >= 2 and max_hop >= 1"));
    }
    if !(params.confidence > 0.0 && params.confidence < 1.0) {
        return Err(Error::param("confidence must lie in (0, 1)"));
    }
    Ok(())
}

/// Adds batches of single-node simulations until the relative half-width is
/// within `rate` or the per-node cap is hit. Samples continue the node's
/// stream, so earlier rounds are reused rather than redrawn.
fn sample_until(
    graph: &Graph,
    model: &DiffusionModel,
    node: NodeId,
    m: &mut Moments,
    rate: f64,
    params: &BestSpreadParams,
) -> Result<()> {
    let key = StreamKey::new(params.master_seed, node as u64);
    loop {
        if m.n >= 2 {
            let est = m.estimate();
            let h = t_halfwidth(est.std, m.n, params.confidence)?;
            if h / est.mean <= rate || m.n >= params.max_simulations_per_node {
                return Ok(());
            }
        }
        let start = m.n as u64;
        let (sum, sum_sq) = sample_moments(
            graph,
            model,
            &[node],
            Some(params.max_hop),
            key,
            start..start + params.batch_size as u64,
        );
        m.n += params.batch_size;
        m.sum += sum;
        m.sum_sq += sum_sq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn min_degree_examples() {
        // Out-degrees (0, 1, 2, 3).
        let g = Graph::from_edges(4, &[(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)], true).unwrap();
        assert_eq!(filter_min_degree(&g, 0).retained, vec![0, 1, 2, 3]);
        assert_eq!(filter_min_degree(&g, 2).retained, vec![2, 3]);
        for t in 1..=4 {
            assert_eq!(filter_min_degree(&g, t).retained.len(), 4 - t);
        }
        assert!(filter_min_degree(&g, 3).candidates_for(2).is_err());
        assert_eq!(filter_min_degree(&g, 2).candidates_for(2).unwrap(), &[2, 3]);
    }

    #[test]
    fn halfwidth_examples() {
        assert_eq!(t_halfwidth(0.0, 10, 0.95).unwrap(), 0.0);
        // Table value t(0.975, 4) = 2.776.
        let h = t_halfwidth(1.0, 5, 0.95).unwrap();
        assert!((h - 2.776 / 5f64.sqrt()).abs() < 1e-3, "{h}");
        assert_relative_eq!(t_halfwidth(2.0, 10_000, 0.95).unwrap(), 1.959964 * 2.0 / 100.0, epsilon = 1e-5);
        assert!(t_halfwidth(1.0, 1, 0.95).is_err());
        assert!(t_halfwidth(1.0, 5, 1.0).is_err());
    }

    /// Binomial coefficient by Pascal's triangle.
    fn pascal(n: usize, k: usize) -> u128 {
        let mut row = vec![1u128];
        for _ in 0..n {
            let mut next = vec![1u128; row.len() + 1];
            for i in 1..row.len() {
                next[i] = row[i - 1].saturating_add(row[i]);
            }
            row = next;
        }
        row.get(k).copied().unwrap_or(0)
    }

    #[test]
    fn binomial_matches_pascal() {
        for n in 0..80 {
            for k in 0..=n.min(12) {
                assert_eq!(binomial(n as u64, k as u64), pascal(n, k), "C({n},{k})");
            }
        }
        assert_eq!(binomial(42, 10), 1_471_442_973);
        assert_eq!(binomial(70, 10), 396_704_524_216);
    }

    #[test]
    fn targets_for_k10() {
        // Oracle: scan Pascal values directly.
        let target = (10..).find(|&n| pascal(n, 10) >= 1_000_000_000).unwrap();
        let limit = (10..200).filter(|&n| pascal(n, 10) <= 100_000_000_000).max().unwrap();
        assert_eq!(target, 41);
        assert_eq!(retention_targets(10, 1e9, 1e11, 1000), (target, limit));
        // Caps at the graph size.
        assert_eq!(retention_targets(10, 1e9, 1e11, 30), (30, 30));
        assert_eq!(retention_targets(1, 1.0, 3.0, 100), (1, 3));
    }

    fn params(seed: u64) -> BestSpreadParams {
        BestSpreadParams {
            master_seed: seed,
            ..Default::default()
        }
    }

    #[test]
    fn dominant_node_is_kept() {
        // Node 0 reaches 20 leaves with certainty; others are leaves or tiny.
        let mut edges: Vec<_> = (1..=20).map(|v| (0, v)).collect();
        edges.extend([(21, 22), (23, 24)]);
        let g = Graph::from_edges(25, &edges, true).unwrap();
        let p = BestSpreadParams {
            space_lower: 1.0,
            space_upper: 2.0,
            ..params(1)
        };
        let r = filter_best_spread(&g, &DiffusionModel::ic(1.0).unwrap(), 1, &p).unwrap();
        // Every other node's spread is at most 2 with zero variance.
        assert_eq!(r.retained, vec![0]);
        assert_eq!(r.stop, FilterStop::RangeReached);
        assert!(r.complete());
    }

    #[test]
    fn symmetric_twins_stay_together() {
        // Nodes 0 and 1 both point at the same six leaves.
        let edges: Vec<_> = (2..8).flat_map(|v| [(0, v), (1, v)]).collect();
        let g = Graph::from_edges(8, &edges, true).unwrap();
        let p = BestSpreadParams {
            space_lower: 1.0,
            space_upper: 2.0,
            ..params(4)
        };
        let r = filter_best_spread(&g, &DiffusionModel::Wc, 1, &p).unwrap();
        assert!(r.retained.contains(&0) && r.retained.contains(&1), "{r:?}");
        assert!(!r.retained.iter().any(|&u| u >= 2));
    }

    #[test]
    fn best_spread_on_barabasi_albert() {
        let g = crate::generators::barabasi_albert(1000, 3, 0).unwrap();
        let r = filter_best_spread(&g, &DiffusionModel::Wc, 10, &params(0)).unwrap();
        let (target, _) = retention_targets(10, 1e9, 1e11, 1000);
        // C(70, 10) ≈ 3.97e11 is the loose upper end of the residual space.
        assert!((target..=70).contains(&r.retained.len()), "{} retained", r.retained.len());
        // The node with the highest sampled mean is always kept.
        let best = r
            .spreads
            .iter()
            .max_by(|a, b| a.spread.mean.partial_cmp(&b.spread.mean).unwrap().then(b.node.cmp(&a.node)))
            .unwrap();
        assert!(r.retained.contains(&best.node));
        assert!(r.spreads.len() == 1000);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let g = crate::generators::barabasi_albert(300, 3, 2).unwrap();
        let p = BestSpreadParams {
            simulation_budget: Some(1),
            ..params(0)
        };
        let r = filter_best_spread(&g, &DiffusionModel::Wc, 10, &p).unwrap();
        assert_eq!(r.stop, FilterStop::BudgetExhausted);
        assert!(!r.complete());
        assert!(!r.retained.is_empty());
    }

    #[test]
    fn labeled_round_trip() {
        let g = crate::graph::load_edgelist("10 20\n20 30\n30 10\n40 10\n".as_bytes(), true).unwrap();
        let r = filter_min_degree(&g, 1);
        let json = serde_json::to_string(&r.to_labeled(&g)).unwrap();
        let back: LabeledFilterReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.candidates(&g).unwrap(), r.retained);
    }

    proptest! {
        #[test]
        fn min_degree_is_monotone(edges in prop::collection::vec((0usize..15, 0usize..15), 1..60), a in 0usize..6, b in 0usize..6) {
            let g = Graph::from_edges(15, &edges, true).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            let low = filter_min_degree(&g, lo).retained;
            let high = filter_min_degree(&g, hi).retained;
            prop_assert!(high.iter().all(|u| low.contains(u)));
            prop_assert_eq!(filter_min_degree(&g, lo).retained, low);
        }
    }
}
