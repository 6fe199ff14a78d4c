//! Immutable directed graph in compressed adjacency form.
//!
//! Nodes are dense indices in `0..node_count`. The original labels read from
//! an edge list are kept in a bijective label map so results can be reported
//! in the caller's vocabulary. Undirected graphs are stored as two arcs per
//! edge, so every downstream algorithm works on a single directed code path.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense node index.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    labels: Vec<u64>,
    index_of: HashMap<u64, NodeId>,
}

impl Graph {
    /// Builds a graph over `node_count` nodes labelled by their own index.
    ///
    /// Self-loops are dropped and parallel arcs merged. With `directed = false`
    /// each pair is stored in both directions.
    pub fn from_edges(node_count: usize, edges: &[(NodeId, NodeId)], directed: bool) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= node_count || v >= node_count) {
            return Err(Error::param(format!(
                "edge ({u}, {v}) out of range for {node_count} nodes"
            )));
        }
        let labels = (0..node_count as u64).collect();
        Ok(Self::build(labels, edges.to_vec(), directed))
    }

    fn build(labels: Vec<u64>, mut arcs: Vec<(NodeId, NodeId)>, directed: bool) -> Self {
        let n = labels.len();
        arcs.retain(|&(u, v)| u != v);
        if !directed {
            let reversed: Vec<_> = arcs.iter().map(|&(u, v)| (v, u)).collect();
            arcs.extend(reversed);
        }
        arcs.sort_unstable();
        arcs.dedup();

        let (out_offsets, out_targets) = csr(n, arcs.iter().copied());
        let mut rev: Vec<_> = arcs.iter().map(|&(u, v)| (v, u)).collect();
        rev.sort_unstable();
        let (in_offsets, in_sources) = csr(n, rev.into_iter());

        let index_of = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Graph {
            directed,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            labels,
            index_of,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of stored arcs. For undirected graphs this is twice the edge count.
    pub fn arc_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Number of edges: arcs for directed graphs, arc pairs for undirected ones.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arc_count()
        } else {
            self.arc_count() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Successors of `u`, sorted ascending.
    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    /// Predecessors of `v`, sorted ascending.
    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    #[inline]
    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && self.out_neighbors(u).binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// All arcs `(u, v)` in ascending order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Original label of a dense index.
    pub fn label(&self, u: NodeId) -> u64 {
        self.labels[u]
    }

    /// Dense index of an original label.
    pub fn index_of(&self, label: u64) -> Option<NodeId> {
        self.index_of.get(&label).copied()
    }

    /// Out-degree of every node.
    pub fn out_degrees(&self) -> Vec<usize> {
        self.nodes().map(|u| self.out_degree(u)).collect()
    }

    /// Writes the graph as a SNAP-style edge list using original labels.
    /// Undirected edges are emitted once, from the lower to the higher index.
    pub fn write_edgelist<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# {} graph: {} nodes, {} edges",
            if self.directed { "directed" } else { "undirected" },
            self.node_count(),
            self.edge_count()
        )?;
        for (u, v) in self.arcs() {
            if self.directed || u < v {
                writeln!(w, "{}\t{}", self.labels[u], self.labels[v])?;
            }
        }
        w.flush()
    }

    pub fn write_edgelist_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edgelist(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

fn csr(n: usize, sorted_arcs: impl Iterator<Item = (NodeId, NodeId)>) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; n + 1];
    let mut targets = Vec::new();
    for (u, v) in sorted_arcs {
        offsets[u + 1] += 1;
        targets.push(v);
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, targets)
}

/// Reads a SNAP edge list: `#` comment lines, then `u v` integer pairs.
///
/// Labels are remapped to dense indices in ascending label order. Self-loops
/// are dropped (a label that only occurs in a self-loop does not become a
/// node), duplicate edges are merged.
pub fn load_edgelist<R: BufRead>(reader: R, directed: bool) -> Result<Graph> {
    let mut raw = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected two node labels, got {line:?}"),
                })
            }
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid node label {tok:?}"),
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u != v {
            raw.push((u, v));
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut labels: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    labels.sort_unstable();
    labels.dedup();
    let index = |l: u64| labels.binary_search(&l).expect("label collected above");
    let arcs = raw.iter().map(|&(u, v)| (index(u), index(v))).collect();
    Ok(Graph::build(labels, arcs, directed))
}

pub fn load_edgelist_file(path: impl AsRef<Path>, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_edgelist(BufReader::new(file), directed)
}
