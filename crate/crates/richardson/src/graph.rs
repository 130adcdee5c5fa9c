//! Immutable bounded-degree undirected graphs with dense vertex and edge ids.
//!
//! Graphs are assembled through [`GraphBuilder`] and then frozen into a
//! [`Graph`] backed by flat CSR-style arrays. Frozen graphs are immutable and
//! can be shared freely across concurrent replications; builders are
//! single-owner. Freezing consumes the builder, so mutation after freeze is
//! rejected at compile time.

use std::collections::HashSet;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex id, contiguous `0..V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

/// Dense edge id, contiguous `0..E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} does not exist")]
    UnknownVertex(u32),
    #[error("self-loops are not allowed")]
    SelfLoop,
    #[error("self-bridge: endpoints must differ")]
    SelfBridge,
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(u32, u32),
    #[error("length must be at least 1")]
    ZeroLength,
}

/// Mutable graph under construction. Simple graphs only: no self-loops, at
/// most one edge per vertex pair.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    endpoints: Vec<(VertexId, VertexId)>,
    labels: Vec<Option<String>>,
    edge_lookup: HashSet<(u32, u32)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    /// Adds a vertex and returns the next dense id.
    pub fn add_vertex(&mut self, label: Option<&str>) -> VertexId {
        let id = VertexId(self.adjacency.len() as u32);
        self.adjacency.push(Vec::new());
        self.labels.push(label.map(str::to_owned));
        id
    }

    /// Attaches a human-readable label to an existing vertex.
    pub fn set_label(&mut self, v: VertexId, label: impl Into<String>) -> Result<(), GraphError> {
        self.check_vertex(v)?;
        self.labels[v.index()] = Some(label.into());
        Ok(())
    }

    pub fn add_edge(&mut self, u: VertexId, w: VertexId) -> Result<EdgeId, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(w)?;
        if u == w {
            return Err(GraphError::SelfLoop);
        }
        let key = (u.0.min(w.0), u.0.max(w.0));
        if !self.edge_lookup.insert(key) {
            return Err(GraphError::DuplicateEdge(key.0, key.1));
        }
        let id = EdgeId(self.endpoints.len() as u32);
        self.endpoints.push((u, w));
        self.adjacency[u.index()].push((w, id));
        self.adjacency[w.index()].push((u, id));
        Ok(id)
    }

    /// Chains `length` new edges and vertices off `from`; returns the last new
    /// vertex (which has degree 1).
    pub fn add_path(&mut self, from: VertexId, length: usize) -> Result<VertexId, GraphError> {
        self.check_vertex(from)?;
        if length == 0 {
            return Err(GraphError::ZeroLength);
        }
        let mut cursor = from;
        for _ in 0..length {
            let next = self.add_vertex(None);
            self.add_edge(cursor, next)?;
            cursor = next;
        }
        Ok(cursor)
    }

    /// Joins `u` and `w` by a path of `length` edges, returning the
    /// `length - 1` new interior vertices. `length == 1` adds a direct edge.
    pub fn add_bridge(
        &mut self,
        u: VertexId,
        w: VertexId,
        length: usize,
    ) -> Result<Vec<VertexId>, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(w)?;
        if u == w {
            return Err(GraphError::SelfBridge);
        }
        if length == 0 {
            return Err(GraphError::ZeroLength);
        }
        if length == 1 {
            self.add_edge(u, w)?;
            return Ok(Vec::new());
        }
        let mut interior = Vec::with_capacity(length - 1);
        let mut cursor = u;
        for _ in 0..length - 1 {
            let next = self.add_vertex(None);
            self.add_edge(cursor, next)?;
            interior.push(next);
            cursor = next;
        }
        self.add_edge(cursor, w)?;
        Ok(interior)
    }

    /// Freezes the builder into an immutable graph.
    pub fn freeze(self) -> Graph {
        let vertex_count = self.adjacency.len();
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        let mut targets = Vec::with_capacity(2 * self.endpoints.len());
        let mut max_degree = 0;
        offsets.push(0u32);
        for list in &self.adjacency {
            max_degree = max_degree.max(list.len());
            targets.extend_from_slice(list);
            offsets.push(targets.len() as u32);
        }
        Graph {
            offsets,
            targets,
            endpoints: self.endpoints,
            labels: self.labels,
            max_degree,
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v.index() < self.adjacency.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v.0))
        }
    }
}

/// Frozen immutable graph. Adjacency lives in one flat array indexed by a
/// per-vertex offset table so the event engine touches contiguous memory.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<u32>,
    targets: Vec<(VertexId, EdgeId)>,
    endpoints: Vec<(VertexId, VertexId)>,
    labels: Vec<Option<String>>,
    max_degree: usize,
}

impl Graph {
    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    /// Neighbors of `v` as `(neighbor, connecting edge)` pairs.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        let lo = self.offsets[v.index()] as usize;
        let hi = self.offsets[v.index() + 1] as usize;
        &self.targets[lo..hi]
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.endpoints[e.index()]
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels[v.index()].as_deref()
    }

    /// Edges with exactly one endpoint in `a`.
    pub fn boundary_edges(&self, a: &HashSet<VertexId>) -> Vec<EdgeId> {
        let mut out = Vec::new();
        for (idx, &(u, w)) in self.endpoints.iter().enumerate() {
            if a.contains(&u) != a.contains(&w) {
                out.push(EdgeId(idx as u32));
            }
        }
        out
    }

    /// True iff a traversal from vertex 0 reaches every vertex. The empty
    /// graph counts as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &(nbr, _) in self.neighbors(v) {
                if !seen[nbr.index()] {
                    seen[nbr.index()] = true;
                    visited += 1;
                    stack.push(nbr);
                }
            }
        }
        visited == n
    }

    /// Plain-text edge list: header `vertices=V edges=E`, then one
    /// `u w edge_id` line per edge.
    pub fn write_dump(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(
            out,
            "vertices={} edges={}",
            self.vertex_count(),
            self.edge_count()
        )?;
        for (idx, &(u, w)) in self.endpoints.iter().enumerate() {
            writeln!(out, "{} {} {}", u.0, w.0, idx)?;
        }
        Ok(())
    }
}
