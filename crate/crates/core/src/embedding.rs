//! Node embedding table in word2vec text format.
//!
//! The file starts with an `N d` header followed by `N` rows of
//! `label v1 … vd`. Labels are resolved through the graph's label map.

use std::cmp::Ordering;
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: Vec<Option<Vec<f64>>>,
}

/// Bookkeeping from [`EmbeddingTable::load`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub loaded: usize,
    /// Rows whose label is not a node of the graph. They are skipped.
    pub unknown_labels: Vec<String>,
    /// Graph nodes without a row.
    pub missing: usize,
}

impl EmbeddingTable {
    /// Builds a table from per-node optional vectors.
    pub fn new(dimension: usize, vectors: Vec<Option<Vec<f64>>>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if let Some(v) = v {
                if v.len() != dimension {
                    return Err(Error::EmbeddingFormat(format!(
                        "node {i}: expected {dimension} values, got {}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::EmbeddingFormat(format!("node {i}: non-finite value")));
                }
            }
        }
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn load<R: BufRead>(reader: R, graph: &Graph) -> Result<(Self, EmbeddingReport)> {
        let mut lines = reader.lines().enumerate();
        let fmt = |line: usize, msg: String| Error::EmbeddingFormat(format!("line {line}: {msg}"));

        let (rows, dimension) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::EmbeddingFormat("missing header".into()));
            };
            let line = line.map_err(|e| fmt(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let nums: Vec<_> = line.split_whitespace().map(str::parse::<usize>).collect();
            match nums.as_slice() {
                [Ok(n), Ok(d)] if *d > 0 => break (*n, *d),
                _ => return Err(fmt(i + 1, format!("bad header {line:?}"))),
            }
        };

        let mut vectors = vec![None; graph.node_count()];
        let mut report = EmbeddingReport::default();
        let mut seen_rows = 0;
        for (i, line) in lines {
            let line = line.map_err(|e| fmt(i + 1, e.to_string()))?;
            let mut tokens = line.split_whitespace();
            let Some(label) = tokens.next() else { continue };
            seen_rows += 1;
            let values = tokens
                .map(|t| t.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| fmt(i + 1, "invalid or non-finite value".into()))?;
            if values.len() != dimension {
                return Err(fmt(
                    i + 1,
                    format!("expected {dimension} values, got {}", values.len()),
                ));
            }
            match label.parse::<u64>().ok().and_then(|l| graph.index_of(l)) {
                Some(u) => {
                    if vectors[u].replace(values).is_none() {
                        report.loaded += 1;
                    }
                }
                None => report.unknown_labels.push(label.to_string()),
            }
        }
        if seen_rows != rows {
            return Err(Error::EmbeddingFormat(format!(
                "header announces {rows} rows, found {seen_rows}"
            )));
        }
        report.missing = vectors.iter().filter(|v| v.is_none()).count();
        Ok((EmbeddingTable { dimension, vectors }, report))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, node: NodeId) -> Option<&[f64]> {
        self.vectors.get(node).and_then(|v| v.as_deref())
    }

    pub fn is_missing(&self, node: NodeId) -> bool {
        self.vector(node).is_none()
    }

    /// The `m` embedded nodes closest to `node` in Euclidean distance,
    /// excluding `node` itself. Ties go to the lower index.
    pub fn nearest_neighbors(&self, node: NodeId, m: usize) -> Result<Vec<NodeId>> {
        let origin = self.vector(node).ok_or(Error::MissingEmbedding(node))?;
        let mut dists: Vec<(f64, NodeId)> = self
            .vectors
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != node)
            .filter_map(|(u, v)| v.as_ref().map(|v| (squared_distance(origin, v), u)))
            .collect();
        let by_dist = |a: &(f64, NodeId), b: &(f64, NodeId)| {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
        };
        if m < dists.len() {
            dists.select_nth_unstable_by(m, by_dist);
            dists.truncate(m);
        }
        dists.sort_unstable_by(by_dist);
        Ok(dists.into_iter().map(|(_, u)| u).collect())
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
