//! The mutation pool.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::candidates::CandidateSet;
use super::fitness::FitnessEvaluator;
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationStrategy {
    GlobalRandom,
    GlobalLowDegree,
    GlobalLowSpread,
    GlobalLowAdditionalSpread,
    LocalNeighborsRandom,
    LocalNeighborsSecondDegree,
    LocalNeighborsApproxSpread,
    LocalEmbeddingsRandom,
}

impl MutationStrategy {
    pub const ALL: [MutationStrategy; 8] = [
        MutationStrategy::GlobalRandom,
        MutationStrategy::GlobalLowDegree,
        MutationStrategy::GlobalLowSpread,
        MutationStrategy::GlobalLowAdditionalSpread,
        MutationStrategy::LocalNeighborsRandom,
        MutationStrategy::LocalNeighborsSecondDegree,
        MutationStrategy::LocalNeighborsApproxSpread,
        MutationStrategy::LocalEmbeddingsRandom,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MutationStrategy::GlobalRandom => "global-random",
            MutationStrategy::GlobalLowDegree => "global-low-degree",
            MutationStrategy::GlobalLowSpread => "global-low-spread",
            MutationStrategy::GlobalLowAdditionalSpread => "global-low-additional-spread",
            MutationStrategy::LocalNeighborsRandom => "local-neighbors-random",
            MutationStrategy::LocalNeighborsSecondDegree => "local-neighbors-second-degree",
            MutationStrategy::LocalNeighborsApproxSpread => "local-neighbors-approx-spread",
            MutationStrategy::LocalEmbeddingsRandom => "local-embeddings-random",
        }
    }

    /// Whether the strategy reads the per-node spread cache.
    pub fn needs_spread_cache(&self) -> bool {
        matches!(
            self,
            MutationStrategy::GlobalLowSpread | MutationStrategy::LocalNeighborsApproxSpread
        )
    }
}

impl std::fmt::Display for MutationStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MutationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MutationStrategy::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown mutation strategy {s:?}")))
    }
}

/// Everything a mutation may consult.
pub struct MutationContext<'a, 'g> {
    pub graph: &'g Graph,
    pub candidates: &'a CandidateSet,
    /// Approximate single-node spread, indexed by node.
    pub spread_cache: Option<&'a [f64]>,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub embedding_neighbors: usize,
    pub fitness: &'a mut FitnessEvaluator<'g>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutationOutcome {
    pub position: usize,
    pub removed: NodeId,
    pub inserted: NodeId,
    /// The strategy had no eligible replacement and fell back to global-random.
    pub fell_back: bool,
}

/// Replaces exactly one node of `nodes` by the given strategy. Returns `None`
/// only when every candidate is already in the set.
pub fn mutate<R: Rng>(
    nodes: &mut [NodeId],
    strategy: MutationStrategy,
    ctx: &mut MutationContext<'_, '_>,
    rng: &mut R,
) -> Result<Option<MutationOutcome>> {
    if nodes.is_empty() {
        return Ok(None);
    }
    let local = match strategy {
        MutationStrategy::GlobalRandom => None,
        MutationStrategy::GlobalLowDegree => {
            let w: Vec<f64> = nodes
                .iter()
                .map(|&u| 1.0 / (ctx.graph.out_degree(u) as f64 + 1.0))
                .collect();
            return Ok(global_replace(nodes, weighted(&w, rng), ctx, rng, false));
        }
        MutationStrategy::GlobalLowSpread => {
            let cache = spread_cache(ctx)?;
            let w: Vec<f64> = nodes.iter().map(|&u| 1.0 / cache[u].max(1.0)).collect();
            return Ok(global_replace(nodes, weighted(&w, rng), ctx, rng, false));
        }
        MutationStrategy::GlobalLowAdditionalSpread => {
            let whole = ctx.fitness.evaluate(nodes)?;
            let mut w = Vec::with_capacity(nodes.len());
            for i in 0..nodes.len() {
                let rest: Vec<NodeId> = nodes.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &u)| u).collect();
                let gain = (whole - ctx.fitness.evaluate(&rest)?).max(0.0);
                w.push(1.0 / (gain + 1.0));
            }
            return Ok(global_replace(nodes, weighted(&w, rng), ctx, rng, false));
        }
        MutationStrategy::LocalNeighborsRandom
        | MutationStrategy::LocalNeighborsSecondDegree
        | MutationStrategy::LocalNeighborsApproxSpread
        | MutationStrategy::LocalEmbeddingsRandom => Some(rng.gen_range(0..nodes.len())),
    };

    if let Some(pos) = local {
        let victim = nodes[pos];
        let pool: Vec<NodeId> = match strategy {
            MutationStrategy::LocalEmbeddingsRandom => match ctx.embeddings {
                Some(table) if !table.is_missing(victim) => {
                    table.nearest_neighbors(victim, ctx.embedding_neighbors)?
                }
                _ => Vec::new(),
            },
            _ => ctx.graph.out_neighbors(victim).to_vec(),
        };
        let eligible: Vec<NodeId> = pool
            .into_iter()
            .filter(|&v| ctx.candidates.contains(v) && !nodes.contains(&v))
            .collect();
        if !eligible.is_empty() {
            let pick = match strategy {
                MutationStrategy::LocalNeighborsSecondDegree => {
                    let w: Vec<f64> = eligible.iter().map(|&v| ctx.graph.out_degree(v) as f64).collect();
                    weighted(&w, rng)
                }
                MutationStrategy::LocalNeighborsApproxSpread => {
                    let cache = spread_cache(ctx)?;
                    let w: Vec<f64> = eligible.iter().map(|&v| cache[v]).collect();
                    weighted(&w, rng)
                }
                _ => rng.gen_range(0..eligible.len()),
            };
            let inserted = eligible[pick];
            nodes[pos] = inserted;
            return Ok(Some(MutationOutcome {
                position: pos,
                removed: victim,
                inserted,
                fell_back: false,
            }));
        }
        let pos = rng.gen_range(0..nodes.len());
        return Ok(global_replace(nodes, pos, ctx, rng, true));
    }
    let pos = rng.gen_range(0..nodes.len());
    Ok(global_replace(nodes, pos, ctx, rng, false))
}

fn spread_cache<'a>(ctx: &MutationContext<'a, '_>) -> Result<&'a [f64]> {
    ctx.spread_cache
        .ok_or_else(|| Error::param("mutation strategy needs the per-node spread cache"))
}

/// Index drawn proportionally to `w`; uniform when all weights are zero.
fn weighted<R: Rng>(w: &[f64], rng: &mut R) -> usize {
    match WeightedIndex::new(w) {
        Ok(dist) => dist.sample(rng),
        Err(_) => rng.gen_range(0..w.len()),
    }
}

fn global_replace<R: Rng>(
    nodes: &mut [NodeId],
    pos: usize,
    ctx: &MutationContext<'_, '_>,
    rng: &mut R,
    fell_back: bool,
) -> Option<MutationOutcome> {
    let inserted = ctx.candidates.sample_outside(nodes, rng)?;
    let removed = std::mem::replace(&mut nodes[pos], inserted);
    Some(MutationOutcome {
        position: pos,
        removed,
        inserted,
        fell_back,
    })
}
