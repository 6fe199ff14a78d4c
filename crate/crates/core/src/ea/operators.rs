//! Selection and constrained crossover.

use rand::Rng;

use super::candidates::CandidateSet;
use crate::graph::NodeId;

const FORCED_ATTEMPTS: usize = 64;

/// Index of the fittest among `size` uniform draws with replacement.
/// Fitness ties among distinct drawn individuals are broken uniformly.
pub fn tournament_select<R: Rng>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "tournament over an empty population");
    let mut best = f64::NEG_INFINITY;
    let mut tied: Vec<usize> = Vec::new();
    for _ in 0..size.max(1) {
        let i = rng.gen_range(0..fitness.len());
        let f = fitness[i];
        if f > best {
            best = f;
            tied.clear();
            tied.push(i);
        } else if f == best && !tied.contains(&i) {
            tied.push(i);
        }
    }
    tied[rng.gen_range(0..tied.len())]
}

/// One-point crossover over the nodes the parents do not share, followed by
/// a forced uniform mutation so neither child equals a parent.
pub fn crossover<R: Rng>(
    a: &[NodeId],
    b: &[NodeId],
    candidates: &CandidateSet,
    rng: &mut R,
) -> (Vec<NodeId>, Vec<NodeId>) {
    debug_assert_eq!(a.len(), b.len());
    let slots_a: Vec<usize> = (0..a.len()).filter(|&i| !b.contains(&a[i])).collect();
    let slots_b: Vec<usize> = (0..b.len()).filter(|&i| !a.contains(&b[i])).collect();
    let d = slots_a.len();
    let mut child_a = a.to_vec();
    let mut child_b = b.to_vec();
    if d >= 2 {
        let cut = rng.gen_range(1..d);
        for j in cut..d {
            child_a[slots_a[j]] = b[slots_b[j]];
            child_b[slots_b[j]] = a[slots_a[j]];
        }
    }
    force_difference(&mut child_a, a, b, candidates, rng);
    force_difference(&mut child_b, a, b, candidates, rng);
    (child_a, child_b)
}

/// Replaces one uniformly chosen position with a uniform candidate outside
/// the child until the child differs from both parents as a set. Returns
/// false when no such replacement exists.
pub fn force_difference<R: Rng>(
    child: &mut [NodeId],
    a: &[NodeId],
    b: &[NodeId],
    candidates: &CandidateSet,
    rng: &mut R,
) -> bool {
    if child.is_empty() || candidates.len() <= child.len() {
        return false;
    }
    let acceptable = |c: &[NodeId]| !same_set(c, a) && !same_set(c, b);
    for _ in 0..FORCED_ATTEMPTS {
        let pos = rng.gen_range(0..child.len());
        let Some(node) = candidates.sample_outside(child, rng) else {
            return false;
        };
        let old = child[pos];
        child[pos] = node;
        if acceptable(child) {
            return true;
        }
        child[pos] = old;
    }
    let mut options = Vec::new();
    for pos in 0..child.len() {
        for &node in candidates.nodes() {
            if child.contains(&node) {
                continue;
            }
            let old = child[pos];
            child[pos] = node;
            if acceptable(child) {
                options.push((pos, node));
            }
            child[pos] = old;
        }
    }
    if options.is_empty() {
        return false;
    }
    let (pos, node) = options[rng.gen_range(0..options.len())];
    child[pos] = node;
    true
}

pub fn same_set(x: &[NodeId], y: &[NodeId]) -> bool {
    x.len() == y.len() && x.iter().all(|u| y.contains(u))
}
