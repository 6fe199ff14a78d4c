//! Evolutionary optimizer over seed sets of size `k`.
//!
//! Individuals are vectors of `k` distinct candidate nodes kept in insertion
//! order. Each generation keeps the `num_elites` best individuals and fills
//! the rest with children of tournament-selected parents: constrained
//! crossover (with probability `crossover_rate`), then an independent
//! mutation trigger per position with probability `mutation_rate`.

mod candidates;
mod fitness;
mod init;
mod mutation;
mod operators;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use candidates::CandidateSet;
pub use fitness::{set_hash, FitnessEvaluator};
pub use init::{
    initialize_population, random_individual, ranked_weights, weighted_without_replacement, InitResources,
    InitSpec, InitStrategy,
};
pub use mutation::{mutate, MutationContext, MutationOutcome, MutationStrategy};
pub use operators::{crossover, force_difference, same_set, tournament_select};

use crate::bandit::BanditState;
use crate::centrality::{centrality, CentralityScores};
use crate::community::{detect_communities, CommunityPartition};
use crate::diffusion::{DiffusionModel, SpreadMethod, StreamKey};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::filter::{filter_best_spread, filter_min_degree, BestSpreadParams, FilterReport};
use crate::graph::{Graph, NodeId};
use crate::stats;

const EA_STREAM: u64 = 0x6561;
const SPREAD_CACHE_SALT: u64 = 0x5350_5245_4144_0001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub nodes: Vec<NodeId>,
    pub fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MutationSpec {
    Single { strategy: MutationStrategy },
    Bandit { arms: Vec<MutationStrategy>, window: usize },
}

impl MutationSpec {
    pub fn single(strategy: MutationStrategy) -> Self {
        MutationSpec::Single { strategy }
    }

    /// All eight strategies with the given window.
    pub fn full_pool(window: usize) -> Self {
        MutationSpec::Bandit {
            arms: MutationStrategy::ALL.to_vec(),
            window,
        }
    }

    pub fn strategies(&self) -> Vec<MutationStrategy> {
        match self {
            MutationSpec::Single { strategy } => vec![*strategy],
            MutationSpec::Bandit { arms, .. } => arms.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateFilter {
    None,
    MinDegree { threshold: usize },
    BestSpread { params: BestSpreadParams },
    Explicit { nodes: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub num_elites: usize,
    /// Generations without improvement before stopping; `None` means 10% of
    /// `max_generations`, at least 1.
    pub patience: Option<usize>,
    pub k: usize,
    pub model: DiffusionModel,
    pub fitness: SpreadMethod,
    pub init: InitSpec,
    pub mutation: MutationSpec,
    pub candidate_filter: CandidateFilter,
    /// Method for the per-node spread cache used by spread-aware mutations.
    pub spread_cache_method: SpreadMethod,
    pub embedding_neighbors: usize,
    pub master_seed: u64,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population_size: 100,
            max_generations: 100,
            crossover_rate: 1.0,
            mutation_rate: 0.1,
            tournament_size: 5,
            num_elites: 1,
            patience: None,
            k: 10,
            model: DiffusionModel::Wc,
            fitness: SpreadMethod::McMaxHop {
                simulations: 100,
                max_hop: 3,
            },
            init: InitSpec::default(),
            mutation: MutationSpec::single(MutationStrategy::GlobalRandom),
            candidate_filter: CandidateFilter::None,
            spread_cache_method: SpreadMethod::McMaxHop {
                simulations: 100,
                max_hop: 3,
            },
            embedding_neighbors: 10,
            master_seed: 0,
        }
    }
}

impl EaConfig {
    pub fn effective_patience(&self) -> usize {
        self.patience
            .unwrap_or_else(|| ((self.max_generations as f64 * 0.1).round() as usize).max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::param("population_size must be at least 2"));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::param(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(Error::param("tournament_size must lie in [1, population_size]"));
        }
        if self.num_elites >= self.population_size {
            return Err(Error::param("num_elites must be below population_size"));
        }
        if self.patience == Some(0) {
            return Err(Error::param("patience must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if let MutationSpec::Bandit { arms, window } = &self.mutation {
            if arms.is_empty() || *window == 0 {
                return Err(Error::param("bandit needs arms and a positive window"));
            }
        }
        Ok(())
    }
}

/// Optional precomputed inputs; anything missing and needed is computed.
#[derive(Debug, Clone, Copy, Default)]
pub struct EaResources<'a> {
    pub centrality: Option<&'a CentralityScores>,
    pub partition: Option<&'a CommunityPartition>,
    pub embeddings: Option<&'a EmbeddingTable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxGenerations,
    NoImprovement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub filter_ms: f64,
    pub precompute_ms: f64,
    pub init_ms: f64,
    pub evolution_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditSnapshot {
    pub generation: usize,
    pub counts: Vec<u64>,
    pub window_sums: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaResult {
    pub best: Individual,
    /// Best fitness of the initial population.
    pub initial_best: f64,
    /// Best-so-far fitness after each executed generation.
    pub history: Vec<f64>,
    /// Per-generation statistics, generation 0 being the initial population.
    pub generations: Vec<GenerationStats>,
    pub generations_executed: usize,
    pub stop_reason: StopReason,
    pub timings: PhaseTimings,
    pub candidate_count: usize,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub bandit_arms: Vec<MutationStrategy>,
    pub bandit_log: Vec<BanditSnapshot>,
    pub final_population: Vec<Individual>,
}

pub fn evolve(graph: &Graph, config: &EaConfig) -> Result<EaResult> {
    evolve_with(graph, config, EaResources::default())
}

/// Resolves the candidate set for `config`, with the filter report if any.
pub fn resolve_candidates(graph: &Graph, config: &EaConfig) -> Result<(CandidateSet, Option<FilterReport>)> {
    match &config.candidate_filter {
        CandidateFilter::None => Ok((CandidateSet::all(graph), None)),
        CandidateFilter::MinDegree { threshold } => {
            let report = filter_min_degree(graph, *threshold);
            Ok((CandidateSet::new(graph, report.retained.clone())?, Some(report)))
        }
        CandidateFilter::BestSpread { params } => {
            let report = filter_best_spread(graph, &config.model, config.k, params)?;
            let nodes = report.candidates_for(config.k)?.to_vec();
            Ok((CandidateSet::new(graph, nodes)?, Some(report)))
        }
        CandidateFilter::Explicit { nodes } => Ok((CandidateSet::new(graph, nodes.clone())?, None)),
    }
}

/// Approximate spread of each candidate alone; non-candidates hold 0.
pub fn node_spread_cache(
    graph: &Graph,
    model: &DiffusionModel,
    method: SpreadMethod,
    candidates: &CandidateSet,
    master_seed: u64,
) -> Result<Vec<f64>> {
    let values: Vec<(NodeId, f64)> = candidates
        .nodes()
        .par_iter()
        .map(|&u| {
            let key = StreamKey::new(master_seed ^ SPREAD_CACHE_SALT, u as u64);
            method.evaluate(graph, model, &[u], key).map(|e| (u, e.mean))
        })
        .collect::<Result<_>>()?;
    let mut cache = vec![0.0; graph.node_count()];
    for (u, v) in values {
        cache[u] = v;
    }
    Ok(cache)
}

pub fn evolve_with(graph: &Graph, config: &EaConfig, resources: EaResources<'_>) -> Result<EaResult> {
    config.validate()?;
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let (candidates, _) = resolve_candidates(graph, config)?;
    timings.filter_ms = ms(t);
    if candidates.len() < config.k {
        return Err(Error::param(format!(
            "k = {} exceeds the {} available candidates",
            config.k,
            candidates.len()
        )));
    }

    let t = Instant::now();
    let owned_centrality = match (config.init.strategy.metric(), resources.centrality) {
        (Some(metric), Some(s)) if s.metric == metric => None,
        (Some(metric), _) => Some(centrality(graph, metric, None)?),
        _ => None,
    };
    let owned_partition = match (config.init.strategy.needs_partition(), resources.partition) {
        (true, None) => Some(detect_communities(graph, config.master_seed)?),
        _ => None,
    };
    let strategies = config.mutation.strategies();
    let spread_cache = if strategies.iter().any(MutationStrategy::needs_spread_cache) {
        Some(node_spread_cache(
            graph,
            &config.model,
            config.spread_cache_method,
            &candidates,
            config.master_seed,
        )?)
    } else {
        None
    };
    timings.precompute_ms = ms(t);

    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(EA_STREAM);
    let mut fitness = FitnessEvaluator::new(graph, config.model, config.fitness, config.master_seed);

    let t = Instant::now();
    let init_resources = InitResources {
        centrality: owned_centrality.as_ref().or(resources.centrality),
        partition: owned_partition.as_ref().or(resources.partition),
    };
    let initial = initialize_population(
        graph,
        &candidates,
        config.k,
        config.population_size,
        &config.init,
        init_resources,
        &mut rng,
    )?;
    let mut population: Vec<Vec<NodeId>> = initial;
    let mut scores = population
        .iter()
        .map(|ind| fitness.evaluate(ind))
        .collect::<Result<Vec<f64>>>()?;
    timings.init_ms = ms(t);

    let mut bandit = match &config.mutation {
        MutationSpec::Bandit { arms, window } => Some(BanditState::new(arms.clone(), *window)?),
        MutationSpec::Single { .. } => None,
    };

    let start = Instant::now();
    let mut generations = vec![generation_stats(0, &scores, ms(start))];
    let (best_index, mut best_fitness) = argmax(&scores);
    let mut best_nodes = population[best_index].clone();
    let initial_best = best_fitness;
    let mut history = Vec::new();
    let mut bandit_log = Vec::new();
    let patience = config.effective_patience();
    let mut stagnant = 0;
    let mut stop_reason = StopReason::MaxGenerations;

    for generation in 1..=config.max_generations {
        if let Some(b) = bandit.as_mut() {
            b.set_generation(generation as u64);
        }
        let mut next: Vec<Vec<NodeId>> = Vec::with_capacity(config.population_size);
        let mut next_scores = Vec::with_capacity(config.population_size);
        for i in elite_indices(&scores, config.num_elites) {
            next.push(population[i].clone());
            next_scores.push(scores[i]);
        }
        while next.len() < config.population_size {
            let pa = tournament_select(&scores, config.tournament_size, &mut rng);
            let pb = tournament_select(&scores, config.tournament_size, &mut rng);
            let (ca, cb) = if rng.gen_bool(config.crossover_rate) {
                crossover(&population[pa], &population[pb], &candidates, &mut rng)
            } else {
                (population[pa].clone(), population[pb].clone())
            };
            for (mut child, parent) in [(ca, pa), (cb, pb)] {
                if next.len() == config.population_size {
                    break;
                }
                let mut applied: Vec<usize> = Vec::new();
                let triggers = (0..child.len()).filter(|_| rng.gen_bool(config.mutation_rate)).count();
                for _ in 0..triggers {
                    let arm = match &bandit {
                        Some(b) => b.select(),
                        None => 0,
                    };
                    let mut ctx = MutationContext {
                        graph,
                        candidates: &candidates,
                        spread_cache: spread_cache.as_deref(),
                        embeddings: resources.embeddings,
                        embedding_neighbors: config.embedding_neighbors,
                        fitness: &mut fitness,
                    };
                    mutate(&mut child, strategies[arm], &mut ctx, &mut rng)?;
                    if !applied.contains(&arm) {
                        applied.push(arm);
                    }
                }
                let value = fitness.evaluate(&child)?;
                if let Some(b) = bandit.as_mut() {
                    let r = reward(value, scores[parent]);
                    for &arm in &applied {
                        b.record(arm, r)?;
                    }
                }
                next.push(child);
                next_scores.push(value);
            }
        }
        population = next;
        scores = next_scores;

        let (gi, gf) = argmax(&scores);
        if gf > best_fitness {
            best_fitness = gf;
            best_nodes = population[gi].clone();
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        history.push(best_fitness);
        generations.push(generation_stats(generation, &scores, ms(start)));
        if let Some(b) = &bandit {
            bandit_log.push(BanditSnapshot {
                generation,
                counts: b.counts().to_vec(),
                window_sums: (0..b.arms().len()).map(|a| b.q(a)).collect(),
            });
        }
        if stagnant >= patience && generation < config.max_generations {
            stop_reason = StopReason::NoImprovement;
            break;
        }
    }
    timings.evolution_ms = ms(start);

    let final_population = population
        .into_iter()
        .zip(&scores)
        .map(|(nodes, &f)| Individual { nodes, fitness: Some(f) })
        .collect();
    Ok(EaResult {
        best: Individual {
            nodes: best_nodes,
            fitness: Some(best_fitness),
        },
        initial_best,
        generations_executed: history.len(),
        history,
        generations,
        stop_reason,
        timings,
        candidate_count: candidates.len(),
        evaluations: fitness.evaluations(),
        cache_hits: fitness.cache_hits(),
        bandit_arms: if bandit.is_some() { strategies } else { Vec::new() },
        bandit_log,
        final_population,
    })
}

/// Relative, non-negative improvement of a child over its parent.
pub fn reward(child: f64, parent: f64) -> f64 {
    (child - parent).max(0.0) / parent.max(1.0)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn argmax(xs: &[f64]) -> (usize, f64) {
    let mut best = (0, xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// Indices of the `n` fittest, ties to the lower index.
fn elite_indices(scores: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

fn generation_stats(generation: usize, scores: &[f64], elapsed_ms: f64) -> GenerationStats {
    GenerationStats {
        generation,
        best: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: stats::mean(scores),
        std: stats::sample_std(scores),
        elapsed_ms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::exact_spread;

    fn small_graph() -> Graph {
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (4, 5), (5, 6), (6, 7), (7, 4), (3, 4)];
        Graph::from_edges(8, &edges, true).unwrap()
    }

    fn small_config(seed: u64) -> EaConfig {
        EaConfig {
            population_size: 10,
            max_generations: 20,
            k: 2,
            model: DiffusionModel::Ic { p: 0.5 },
            fitness: SpreadMethod::Exact,
            master_seed: seed,
            ..EaConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = EaConfig::default();
        assert_eq!(
            (c.population_size, c.max_generations, c.tournament_size, c.num_elites),
            (100, 100, 5, 1)
        );
        assert_eq!((c.crossover_rate, c.mutation_rate), (1.0, 0.1));
        assert_eq!(c.effective_patience(), 10);
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            EaConfig { population_size: 1, ..EaConfig::default() },
            EaConfig { mutation_rate: 1.5, ..EaConfig::default() },
            EaConfig { tournament_size: 101, ..EaConfig::default() },
            EaConfig { num_elites: 100, ..EaConfig::default() },
            EaConfig { patience: Some(0), ..EaConfig::default() },
            EaConfig { k: 0, ..EaConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn unique_optimum_found() {
        let edges: Vec<_> = (1..12).map(|v| (0, v)).collect();
        let g = Graph::from_edges(12, &edges, true).unwrap();
        let config = EaConfig {
            population_size: 10,
            max_generations: 30,
            k: 1,
            model: DiffusionModel::Ic { p: 1.0 },
            fitness: SpreadMethod::Mc { simulations: 10 },
            ..EaConfig::default()
        };
        let r = evolve(&g, &config).unwrap();
        assert_eq!(r.best.nodes, vec![0]);
        assert_eq!(r.best.fitness, Some(12.0));
    }

    #[test]
    fn matches_exhaustive_optimum() {
        let g = small_graph();
        let model = DiffusionModel::Ic { p: 0.5 };
        let mut optimum = 0.0f64;
        for a in 0..8 {
            for b in a + 1..8 {
                optimum = optimum.max(exact_spread(&g, &model, &[a, b]).unwrap());
            }
        }
        let hits = (0..10)
            .filter(|&seed| {
                let r = evolve(&g, &small_config(seed)).unwrap();
                (r.best.fitness.unwrap() - optimum).abs() < 1e-9
            })
            .count();
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn history_monotone_and_sized() {
        let g = crate::generators::barabasi_albert(200, 2, 1).unwrap();
        let config = EaConfig {
            population_size: 20,
            max_generations: 15,
            k: 4,
            fitness: SpreadMethod::TwoHop,
            mutation: MutationSpec::full_pool(100),
            ..EaConfig::default()
        };
        let r = evolve(&g, &config).unwrap();
        assert_eq!(r.history.len(), r.generations_executed);
        assert_eq!(r.generations.len(), r.generations_executed + 1);
        assert!(r.history.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.initial_best <= r.history[0]);
        assert_eq!(r.bandit_log.len(), r.generations_executed);
        for ind in &r.final_population {
            let mut s = ind.nodes.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 4);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = crate::generators::barabasi_albert(150, 2, 2).unwrap();
        let config = EaConfig {
            population_size: 12,
            max_generations: 8,
            k: 3,
            fitness: SpreadMethod::McMaxHop { simulations: 50, max_hop: 2 },
            mutation: MutationSpec::full_pool(10),
            master_seed: 77,
            ..EaConfig::default()
        };
        let a = evolve(&g, &config).unwrap();
        let b = evolve(&g, &config).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.history, b.history);
        assert_eq!(a.final_population, b.final_population);
        assert_eq!(a.bandit_log, b.bandit_log);
    }

    #[test]
    fn no_variation_preserves_individuals() {
        let g = crate::generators::barabasi_albert(100, 2, 3).unwrap();
        let base = EaConfig {
            population_size: 16,
            k: 3,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            fitness: SpreadMethod::TwoHop,
            master_seed: 5,
            ..EaConfig::default()
        };
        let before = evolve(&g, &EaConfig { max_generations: 0, ..base.clone() }).unwrap();
        let after = evolve(&g, &EaConfig { max_generations: 1, ..base }).unwrap();
        for ind in &after.final_population {
            assert!(before.final_population.iter().any(|p| p.nodes == ind.nodes));
        }
    }

    #[test]
    fn stops_on_stagnation() {
        let edges: Vec<_> = (1..6).map(|v| (0, v)).collect();
        let g = Graph::from_edges(6, &edges, true).unwrap();
        let config = EaConfig {
            population_size: 8,
            max_generations: 100,
            k: 1,
            model: DiffusionModel::Ic { p: 1.0 },
            fitness: SpreadMethod::Exact,
            init: InitSpec {
                strategy: InitStrategy::SingleSmart(crate::centrality::Metric::Degree),
                smart_fraction: 0.0,
            },
            ..EaConfig::default()
        };
        let r = evolve(&g, &config).unwrap();
        assert_eq!(r.stop_reason, StopReason::NoImprovement);
        assert_eq!(r.generations_executed, 10);
        assert_eq!(r.best.nodes, vec![0]);
    }

    #[test]
    fn candidates_respected() {
        let g = crate::generators::barabasi_albert(120, 3, 4).unwrap();
        let allowed: Vec<NodeId> = (0..30).collect();
        let config = EaConfig {
            population_size: 10,
            max_generations: 5,
            k: 5,
            fitness: SpreadMethod::TwoHop,
            candidate_filter: CandidateFilter::Explicit { nodes: allowed },
            mutation: MutationSpec::full_pool(20),
            ..EaConfig::default()
        };
        let r = evolve(&g, &config).unwrap();
        assert_eq!(r.candidate_count, 30);
        assert!(r.final_population.iter().flat_map(|i| &i.nodes).all(|&u| u < 30));
    }

    #[test]
    fn rewards_are_relative_gains() {
        assert_eq!(reward(12.0, 10.0), 0.2);
        assert_eq!(reward(8.0, 10.0), 0.0);
        assert_eq!(reward(1.5, 0.5), 1.0);
    }
}
