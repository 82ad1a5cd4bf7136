use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Colour, ColouredDigraph, GraphError, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path {index} starts at {found} but the previous path ends at {expected}")]
    EndpointMismatch { index: usize, expected: Vertex, found: Vertex },
    #[error("vertex {0} appears twice")]
    RepeatedVertex(Vertex),
}

/// A sequence of distinct vertices. The empty sequence and single vertices
/// are valid (trivial) paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirectedPath {
    vertices: Vec<Vertex>,
}

impl DirectedPath {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, PathError> {
        let mut seen = HashSet::with_capacity(vertices.len());
        for &v in &vertices {
            if !seen.insert(v) {
                return Err(PathError::RepeatedVertex(v));
            }
        }
        Ok(DirectedPath { vertices })
    }

    pub fn trivial(v: Vertex) -> Self {
        DirectedPath { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<Vertex> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<Vertex> {
        self.vertices.last().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    /// Colours of the path's edges in order; fails on a missing edge.
    pub fn colours(&self, d: &ColouredDigraph) -> Result<Vec<Colour>, GraphError> {
        self.edges()
            .map(|(u, v)| d.colour(u, v).ok_or(GraphError::EdgeNotInGraph(u, v)))
            .collect()
    }

    /// Interior vertices (everything except the two ends).
    pub fn interior(&self) -> &[Vertex] {
        if self.vertices.len() <= 2 {
            &[]
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }
}

/// Joins paths that share consecutive endpoints. Empty paths are skipped.
pub fn concat_paths<'a>(
    paths: impl IntoIterator<Item = &'a DirectedPath>,
) -> Result<DirectedPath, PathError> {
    let mut out: Vec<Vertex> = Vec::new();
    for (index, p) in paths.into_iter().enumerate() {
        let Some(first) = p.first() else { continue };
        match out.last() {
            None => out.extend_from_slice(&p.vertices),
            Some(&last) if last == first => out.extend_from_slice(&p.vertices[1..]),
            Some(&last) => {
                return Err(PathError::EndpointMismatch { index, expected: last, found: first })
            }
        }
    }
    DirectedPath::new(out)
}
