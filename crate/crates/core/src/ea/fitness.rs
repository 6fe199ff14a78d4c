use std::collections::HashMap;

use crate::diffusion::{DiffusionModel, SpreadMethod, StreamKey};
use crate::error::Result;
use crate::graph::{Graph, NodeId};

/// Seed-set fitness with a per-run cache.
///
/// The RNG stream of an evaluation is derived from the sorted seed set, so a
/// cached value and a fresh evaluation of the same set always agree.
pub struct FitnessEvaluator<'g> {
    graph: &'g Graph,
    model: DiffusionModel,
    method: SpreadMethod,
    master_seed: u64,
    cache: HashMap<Vec<NodeId>, f64>,
    evaluations: usize,
    hits: usize,
}

impl<'g> FitnessEvaluator<'g> {
    pub fn new(graph: &'g Graph, model: DiffusionModel, method: SpreadMethod, master_seed: u64) -> Self {
        FitnessEvaluator {
            graph,
            model,
            method,
            master_seed,
            cache: HashMap::new(),
            evaluations: 0,
            hits: 0,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn method(&self) -> SpreadMethod {
        self.method
    }

    /// Mean spread of `nodes`; the empty set scores zero.
    pub fn evaluate(&mut self, nodes: &[NodeId]) -> Result<f64> {
        if nodes.is_empty() {
            return Ok(0.0);
        }
        let mut key = nodes.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.cache.get(&key) {
            self.hits += 1;
            return Ok(v);
        }
        let stream = StreamKey::new(self.master_seed, set_hash(&key));
        let value = self.method.evaluate(self.graph, &self.model, &key, stream)?.mean;
        self.evaluations += 1;
        self.cache.insert(key, value);
        Ok(value)
    }

    /// Fresh (uncached) evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn cache_hits(&self) -> usize {
        self.hits
    }
}

/// FNV-1a over the sorted node ids.
pub fn set_hash(sorted: &[NodeId]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &u in sorted {
        for b in (u as u64).to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
