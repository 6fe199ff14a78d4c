//! Node centrality scores.
//!
//! All metrics work on the stored arcs, so undirected graphs (stored as arc
//! pairs) get their usual undirected values. Betweenness is parallel over
//! source nodes with an ordered reduction, keeping results bit-identical for
//! any thread count.

use std::collections::VecDeque;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Betweenness,
    Closeness,
    Degree,
    Eigenvector,
    Katz,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Betweenness,
        Metric::Closeness,
        Metric::Degree,
        Metric::Eigenvector,
        Metric::Katz,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Betweenness => "betweenness",
            Metric::Closeness => "closeness",
            Metric::Degree => "degree",
            Metric::Eigenvector => "eigenvector",
            Metric::Katz => "katz",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown centrality metric {s:?}")))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub metric: Metric,
    pub values: Vec<f64>,
}

impl CentralityScores {
    /// The `k` highest-scoring nodes among `candidates`, ties to the lower index.
    pub fn top_k(&self, candidates: &[NodeId], k: usize) -> Vec<NodeId> {
        let mut ranked = candidates.to_vec();
        ranked.sort_by(|&a, &b| {
            self.values[b]
                .partial_cmp(&self.values[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        ranked.truncate(k);
        ranked
    }
}

/// Iteration limits shared by the spectral metrics.
pub const MAX_ITERATIONS: usize = 1000;
pub const TOLERANCE: f64 = 1e-6;

/// Computes `metric` for every node.
///
/// `budget` bounds the wall-clock time; metrics that overrun return
/// [`Error::BudgetExceeded`].
pub fn centrality(graph: &Graph, metric: Metric, budget: Option<Duration>) -> Result<CentralityScores> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let deadline = budget.map(|b| Instant::now() + b);
    let values = match metric {
        Metric::Degree => graph.nodes().map(|u| graph.out_degree(u) as f64).collect(),
        Metric::Betweenness => betweenness(graph, deadline)?,
        Metric::Closeness => closeness(graph, deadline)?,
        Metric::Eigenvector => eigenvector(graph, deadline)?,
        Metric::Katz => katz(graph, deadline)?,
    };
    Ok(CentralityScores { metric, values })
}

fn check_deadline(deadline: Option<Instant>, metric: &'static str) -> Result<()> {
    match deadline {
        Some(d) if Instant::now() > d => Err(Error::BudgetExceeded(metric)),
        _ => Ok(()),
    }
}

const SOURCE_CHUNK: usize = 64;

/// Brandes accumulation over all sources. Undirected graphs count each
/// unordered pair once.
fn betweenness(graph: &Graph, deadline: Option<Instant>) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let sources: Vec<NodeId> = graph.nodes().collect();
    let partials: Vec<Result<Vec<f64>>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            check_deadline(deadline, "betweenness")?;
            let mut acc = vec![0.0; n];
            let mut state = BrandesState::new(n);
            for &s in chunk {
                state.accumulate(graph, s, &mut acc);
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            *t += p;
        }
    }
    if !graph.is_directed() {
        total.iter_mut().for_each(|x| *x /= 2.0);
    }
    Ok(total)
}

struct BrandesState {
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    preds: Vec<Vec<NodeId>>,
    order: Vec<NodeId>,
    queue: VecDeque<NodeId>,
}

impl BrandesState {
    fn new(n: usize) -> Self {
        BrandesState {
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }

    fn accumulate(&mut self, graph: &Graph, s: NodeId, acc: &mut [f64]) {
        for &v in &self.order {
            self.sigma[v] = 0.0;
            self.dist[v] = -1;
            self.delta[v] = 0.0;
            self.preds[v].clear();
        }
        self.order.clear();
        self.sigma[s] = 1.0;
        self.dist[s] = 0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            for &w in graph.out_neighbors(v) {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
        for &w in self.order.iter().rev() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in &self.preds[w] {
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Closeness with the Wasserman–Faust correction: `(r / D) · (r / (n − 1))`
/// where `r` nodes are reachable along out-arcs at total distance `D`.
/// Nodes reaching nothing score zero.
fn closeness(graph: &Graph, deadline: Option<Instant>) -> Result<Vec<f64>> {
    let n = graph.node_count();
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let sources: Vec<NodeId> = graph.nodes().collect();
    let chunks: Vec<Result<Vec<f64>>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            check_deadline(deadline, "closeness")?;
            let mut dist = vec![usize::MAX; n];
            let mut touched = Vec::new();
            let mut queue = VecDeque::new();
            let mut out = Vec::with_capacity(chunk.len());
            for &s in chunk {
                for &v in &touched {
                    dist[v] = usize::MAX;
                }
                touched.clear();
                dist[s] = 0;
                touched.push(s);
                queue.push_back(s);
                let mut total = 0usize;
                while let Some(v) = queue.pop_front() {
                    for &w in graph.out_neighbors(v) {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            total += dist[w];
                            touched.push(w);
                            queue.push_back(w);
                        }
                    }
                }
                let reached = (touched.len() - 1) as f64;
                out.push(if total == 0 {
                    0.0
                } else {
                    (reached / total as f64) * (reached / (n - 1) as f64)
                });
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(n);
    for c in chunks {
        values.extend(c?);
    }
    Ok(values)
}

/// Power iteration on `x ← x + Aᵀx`, normalised to unit maximum. The identity
/// shift keeps the iteration from oscillating on bipartite graphs without
/// changing the dominant eigenvector.
fn eigenvector(graph: &Graph, deadline: Option<Instant>) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let mut x = vec![1.0; n];
    let mut next = vec![0.0; n];
    for iteration in 1..=MAX_ITERATIONS {
        if iteration % 16 == 0 {
            check_deadline(deadline, "eigenvector")?;
        }
        next.par_iter_mut().enumerate().for_each(|(v, out)| {
            *out = x[v] + graph.in_neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        });
        let max = next.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(vec![0.0; n]);
        }
        next.iter_mut().for_each(|y| *y /= max);
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change < TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        metric: "eigenvector",
        iterations: MAX_ITERATIONS,
    })
}

/// Attenuation used by Katz: `min(0.005, 0.85 / λ)`, where `λ` bounds the
/// spectral radius by the smaller of the maximum in- and out-degree.
pub fn katz_alpha(graph: &Graph) -> f64 {
    let max_out = graph.nodes().map(|u| graph.out_degree(u)).max().unwrap_or(0);
    let max_in = graph.nodes().map(|u| graph.in_degree(u)).max().unwrap_or(0);
    let lambda = max_out.min(max_in) as f64;
    if lambda == 0.0 {
        0.005
    } else {
        (0.85 / lambda).min(0.005)
    }
}

/// Katz centrality `x = α Aᵀ x + β` with `β = 1`, iterated to a fixed point.
fn katz(graph: &Graph, deadline: Option<Instant>) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let alpha = katz_alpha(graph);
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    for iteration in 1..=MAX_ITERATIONS {
        if iteration % 16 == 0 {
            check_deadline(deadline, "katz")?;
        }
        next.par_iter_mut().enumerate().for_each(|(v, out)| {
            *out = 1.0 + alpha * graph.in_neighbors(v).iter().map(|&u| x[u]).sum::<f64>();
        });
        let change = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if change < TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        metric: "katz",
        iterations: MAX_ITERATIONS,
    })
}
