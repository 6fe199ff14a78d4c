use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Nodes an individual may draw seeds from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    nodes: Vec<NodeId>,
    member: Vec<bool>,
}

impl CandidateSet {
    pub fn all(graph: &Graph) -> Self {
        CandidateSet {
            nodes: graph.nodes().collect(),
            member: vec![true; graph.node_count()],
        }
    }

    pub fn new(graph: &Graph, mut nodes: Vec<NodeId>) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&bad) = nodes.iter().find(|&&u| u >= graph.node_count()) {
            return Err(Error::param(format!("candidate {bad} out of range")));
        }
        let mut member = vec![false; graph.node_count()];
        for &u in &nodes {
            member[u] = true;
        }
        Ok(CandidateSet { nodes, member })
    }

    /// Candidates, ascending.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn contains(&self, u: NodeId) -> bool {
        self.member.get(u).copied().unwrap_or(false)
    }

    /// A uniform candidate not in `exclude`, or `None` when every candidate
    /// is excluded.
    pub fn sample_outside<R: Rng>(&self, exclude: &[NodeId], rng: &mut R) -> Option<NodeId> {
        let excluded = exclude.iter().filter(|&&u| self.contains(u)).count();
        if excluded >= self.nodes.len() {
            return None;
        }
        if self.nodes.len() >= 4 * exclude.len().max(1) {
            loop {
                let u = self.nodes[rng.gen_range(0..self.nodes.len())];
                if !exclude.contains(&u) {
                    return Some(u);
                }
            }
        }
        let free: Vec<NodeId> = self.nodes.iter().copied().filter(|u| !exclude.contains(u)).collect();
        Some(free[rng.gen_range(0..free.len())])
    }
}
