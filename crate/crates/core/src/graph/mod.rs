//! Undirected graphs, clique generating classes, neighbourhoods and the
//! generators used by the experiments.

mod cliques;
mod decomposable;
mod generators;
mod neighborhood;

pub use cliques::{cliques_generating_class, maximal_cliques, DEFAULT_CLIQUE_GUARD};
pub use decomposable::{junction_tree, perfect_elimination_order, JunctionTree};
pub use generators::{make_cycle, make_lattice, make_path, make_random_graph, make_star};
pub use neighborhood::{neighborhood, Hop, Neighborhood};

use crate::error::{Error, Result};
use crate::model::VertexSet;
use std::io::{BufRead, Write};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    adjacency: Vec<VertexSet>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects self-loops, out-of-range endpoints and repeated edges.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![VertexSet::empty(); vertex_count];
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::usage(format!("self-loop at vertex {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::usage(format!(
                    "edge ({a},{b}) out of range for {vertex_count} vertices"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if adjacency[u].contains(v) {
                return Err(Error::usage(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
            list.push((u, v));
        }
        list.sort_unstable();
        Ok(Graph {
            vertex_count,
            adjacency,
            edges: list,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn is_complete(&self, set: &VertexSet) -> bool {
        let s = set.as_slice();
        s.iter()
            .enumerate()
            .all(|(k, &a)| s[k + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Text edge list: `#vertices n` followed by one `u v` pair per line.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#vertices {}", self.vertex_count)?;
        for (a, b) in &self.edges {
            writeln!(w, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut vertex_count = None;
        let mut edges = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#vertices") {
                let n = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(lineno, format!("invalid vertex count: {e}")))?;
                vertex_count = Some(n);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            if vertex_count.is_none() {
                return Err(Error::parse(lineno, "edge before `#vertices n` header"));
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "expected `u v`"))?
                    .parse::<usize>()
                    .map_err(|e| Error::parse(lineno, format!("invalid vertex: {e}")))
            };
            let (a, b) = (next()?, next()?);
            if parts.next().is_some() {
                return Err(Error::parse(lineno, "trailing tokens after `u v`"));
            }
            edges.push((a, b));
        }
        let n = vertex_count.ok_or_else(|| Error::parse(1, "missing `#vertices n` header"))?;
        Graph::new(n, edges)
    }
}
