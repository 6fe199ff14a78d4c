//! Initial population strategies.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::candidates::CandidateSet;
use crate::centrality::{CentralityScores, Metric};
use crate::community::CommunityPartition;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", content = "metric", rename_all = "kebab-case")]
pub enum InitStrategy {
    Random,
    /// One individual made of the top-k nodes by a centrality metric.
    SingleSmart(Metric),
    /// Nodes drawn with weight `out_degree + 1`.
    DegreeRandom,
    /// Nodes drawn with weight `n − rank` in descending-degree order.
    DegreeRandomRanked,
    /// A community drawn by size, then a node inside it by `out_degree + 1`.
    CommunityDegree,
}

impl InitStrategy {
    pub fn needs_partition(&self) -> bool {
        matches!(self, InitStrategy::CommunityDegree)
    }

    pub fn metric(&self) -> Option<Metric> {
        match self {
            InitStrategy::SingleSmart(m) => Some(*m),
            _ => None,
        }
    }
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" | "none" => InitStrategy::Random,
            "degree-random" => InitStrategy::DegreeRandom,
            "degree-random-ranked" => InitStrategy::DegreeRandomRanked,
            "community-degree" => InitStrategy::CommunityDegree,
            other => match other.strip_prefix("single-smart:") {
                Some(metric) => InitStrategy::SingleSmart(metric.parse()?),
                None => return Err(Error::param(format!("unknown init strategy {other:?}"))),
            },
        })
    }
}

impl std::fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitStrategy::Random => f.write_str("random"),
            InitStrategy::SingleSmart(m) => write!(f, "single-smart:{m}"),
            InitStrategy::DegreeRandom => f.write_str("degree-random"),
            InitStrategy::DegreeRandomRanked => f.write_str("degree-random-ranked"),
            InitStrategy::CommunityDegree => f.write_str("community-degree"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub strategy: InitStrategy,
    /// Share of the population built by a multiple-smart strategy.
    pub smart_fraction: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec {
            strategy: InitStrategy::Random,
            smart_fraction: 0.5,
        }
    }
}

/// Inputs a strategy may need beyond the graph.
#[derive(Debug, Clone, Copy, Default)]
pub struct InitResources<'a> {
    pub centrality: Option<&'a CentralityScores>,
    pub partition: Option<&'a CommunityPartition>,
}

/// Builds `population_size` seed sets of `k` distinct candidates each.
pub fn initialize_population<R: Rng>(
    graph: &Graph,
    candidates: &CandidateSet,
    k: usize,
    population_size: usize,
    spec: &InitSpec,
    resources: InitResources<'_>,
    rng: &mut R,
) -> Result<Vec<Vec<NodeId>>> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if k > candidates.len() {
        return Err(Error::param(format!(
            "k = {k} exceeds the {} available candidates",
            candidates.len()
        )));
    }
    if !(0.0..=1.0).contains(&spec.smart_fraction) {
        return Err(Error::param("smart_fraction must lie in [0, 1]"));
    }
    let smart_count = match spec.strategy {
        InitStrategy::Random => 0,
        InitStrategy::SingleSmart(_) => 1.min(population_size),
        _ => ((spec.smart_fraction * population_size as f64).ceil() as usize).min(population_size),
    };

    let mut population = Vec::with_capacity(population_size);
    match spec.strategy {
        InitStrategy::Random => {}
        InitStrategy::SingleSmart(metric) => {
            let scores = resources
                .centrality
                .filter(|s| s.metric == metric)
                .ok_or_else(|| Error::param(format!("single-smart init needs {metric} scores")))?;
            population.push(scores.top_k(candidates.nodes(), k));
        }
        InitStrategy::DegreeRandom => {
            let weights: Vec<f64> = candidates
                .nodes()
                .iter()
                .map(|&u| graph.out_degree(u) as f64 + 1.0)
                .collect();
            for _ in 0..smart_count {
                population.push(weighted_without_replacement(candidates.nodes(), &weights, k, rng));
            }
        }
        InitStrategy::DegreeRandomRanked => {
            let weights = ranked_weights(graph, candidates.nodes());
            for _ in 0..smart_count {
                population.push(weighted_without_replacement(candidates.nodes(), &weights, k, rng));
            }
        }
        InitStrategy::CommunityDegree => {
            let partition = resources
                .partition
                .ok_or_else(|| Error::param("community-degree init needs a community partition"))?;
            let mut groups: Vec<Vec<NodeId>> = vec![Vec::new(); partition.community_count()];
            for &u in candidates.nodes() {
                groups[partition.assignment[u]].push(u);
            }
            groups.retain(|g| !g.is_empty());
            for _ in 0..smart_count {
                population.push(community_degree_individual(graph, &groups, k, rng));
            }
        }
    }
    while population.len() < population_size {
        population.push(random_individual(candidates, k, rng));
    }
    Ok(population)
}

pub fn random_individual<R: Rng>(candidates: &CandidateSet, k: usize, rng: &mut R) -> Vec<NodeId> {
    index::sample(rng, candidates.len(), k)
        .into_iter()
        .map(|i| candidates.nodes()[i])
        .collect()
}

/// Weight `n − rank`, where rank 0 is the highest out-degree (ties by index).
pub fn ranked_weights(graph: &Graph, nodes: &[NodeId]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| {
        graph
            .out_degree(nodes[b])
            .cmp(&graph.out_degree(nodes[a]))
            .then(nodes[a].cmp(&nodes[b]))
    });
    let n = nodes.len();
    let mut weights = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        weights[i] = (n - rank) as f64;
    }
    weights
}

/// `k` distinct items drawn one at a time with probability proportional to
/// the remaining weights.
pub fn weighted_without_replacement<R: Rng>(items: &[NodeId], weights: &[f64], k: usize, rng: &mut R) -> Vec<NodeId> {
    let pairs: Vec<(NodeId, f64)> = items.iter().copied().zip(weights.iter().copied()).collect();
    let mut chosen: Vec<NodeId> = pairs
        .choose_multiple_weighted(rng, k, |p| p.1)
        .expect("weights are positive and finite")
        .map(|p| p.0)
        .collect();
    chosen.shuffle(rng);
    chosen
}

fn community_degree_individual<R: Rng>(graph: &Graph, groups: &[Vec<NodeId>], k: usize, rng: &mut R) -> Vec<NodeId> {
    let sizes: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let mut taken: Vec<Vec<bool>> = groups.iter().map(|g| vec![false; g.len()]).collect();
    let mut remaining: Vec<usize> = groups.iter().map(Vec::len).collect();
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let weights: Vec<f64> = sizes
            .iter()
            .zip(&remaining)
            .map(|(&s, &r)| if r > 0 { s } else { 0.0 })
            .collect();
        let c = WeightedIndex::new(&weights).expect("k <= candidates").sample(rng);
        let node_weights: Vec<f64> = groups[c]
            .iter()
            .zip(&taken[c])
            .map(|(&u, &t)| if t { 0.0 } else { graph.out_degree(u) as f64 + 1.0 })
            .collect();
        let i = WeightedIndex::new(&node_weights).expect("community has free nodes").sample(rng);
        taken[c][i] = true;
        remaining[c] -= 1;
        out.push(groups[c][i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{centrality, Metric};
    use crate::community::detect_communities;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn distinct_k(ind: &[NodeId], k: usize) -> bool {
        let mut s = ind.to_vec();
        s.sort_unstable();
        s.dedup();
        s.len() == k
    }

    #[test]
    fn half_smart_half_random() {
        let g = crate::generators::barabasi_albert(300, 3, 0).unwrap();
        let cands = CandidateSet::all(&g);
        let spec = InitSpec {
            strategy: InitStrategy::DegreeRandomRanked,
            smart_fraction: 0.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pop = initialize_population(&g, &cands, 10, 100, &spec, InitResources::default(), &mut rng).unwrap();
        assert_eq!(pop.len(), 100);
        assert!(pop.iter().all(|ind| distinct_k(ind, 10)));
        // Smart individuals favour high-degree nodes.
        let mean_deg = |inds: &[Vec<NodeId>]| {
            inds.iter().flatten().map(|&u| g.out_degree(u) as f64).sum::<f64>() / (inds.len() * 10) as f64
        };
        assert!(mean_deg(&pop[..50]) > mean_deg(&pop[50..]));
    }

    #[test]
    fn single_smart_degree_on_star() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], false).unwrap();
        let scores = centrality(&g, Metric::Degree, None).unwrap();
        let spec = InitSpec {
            strategy: InitStrategy::SingleSmart(Metric::Degree),
            smart_fraction: 0.0,
        };
        let res = InitResources {
            centrality: Some(&scores),
            partition: None,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = initialize_population(&g, &CandidateSet::all(&g), 1, 10, &spec, res, &mut rng).unwrap();
        assert_eq!(pop[0], vec![0]);
        assert_eq!(pop.len(), 10);
    }

    #[test]
    fn degree_random_frequencies() {
        // Candidates {0, 1, 2} with out-degrees (10, 1, 1): weights (11, 2, 2).
        let mut edges: Vec<_> = (3..13).map(|v| (0, v)).collect();
        edges.extend([(1, 3), (2, 4)]);
        let g = Graph::from_edges(13, &edges, true).unwrap();
        let cands = CandidateSet::new(&g, vec![0, 1, 2]).unwrap();
        let spec = InitSpec {
            strategy: InitStrategy::DegreeRandom,
            smart_fraction: 1.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 10_000;
        let pop = initialize_population(&g, &cands, 1, draws, &spec, InitResources::default(), &mut rng).unwrap();
        let hits = pop.iter().filter(|ind| ind[0] == 0).count() as f64;
        let p = 11.0 / 15.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - draws as f64 * p).abs() <= 3.0 * sigma, "{hits}");
    }

    #[test]
    fn ranked_weights_order() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], true).unwrap();
        assert_eq!(ranked_weights(&g, &[0, 1, 2, 3]), vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(ranked_weights(&g, &[3, 2]), vec![1.0, 2.0]);
    }

    #[test]
    fn community_degree_covers_k_distinct() {
        let g = crate::generators::barabasi_albert(400, 2, 5).unwrap();
        let part = detect_communities(&g, 5).unwrap();
        let spec = InitSpec {
            strategy: InitStrategy::CommunityDegree,
            smart_fraction: 0.3,
        };
        let res = InitResources {
            centrality: None,
            partition: Some(&part),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = initialize_population(&g, &CandidateSet::all(&g), 8, 20, &spec, res, &mut rng).unwrap();
        assert!(pop.iter().all(|ind| distinct_k(ind, 8)));
    }

    #[test]
    fn rejects_k_above_candidates() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = initialize_population(
            &g,
            &CandidateSet::all(&g),
            4,
            2,
            &InitSpec::default(),
            InitResources::default(),
            &mut rng,
        );
        assert!(r.is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["random", "degree-random", "degree-random-ranked", "community-degree", "single-smart:katz"] {
            let parsed: InitStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert!("bogus".parse::<InitStrategy>().is_err());
    }
}
