//! Coloured digraph data model.
//!
//! Vertices and colours are dense `u32` ids. A [`ColouredDigraph`] is
//! immutable once built and keeps four compressed indexes over its edge set:
//! out-arcs by head, in-arcs by tail, in-arcs by `(colour, tail)`, and one
//! edge list per colour class.

mod io;
mod path;
mod verify;

pub use io::{read_graph, read_graph_file, write_graph, write_graph_file, GraphIoError};
pub use path::{concat_paths, DirectedPath, PathError};
pub use verify::{
    is_rainbow, verify_rainbow_hamilton_cycle, verify_rainbow_path_contract, Verdict, Violation,
};

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = u32;
pub type Colour = u32;

/// Colour carried by edges of a digraph that has not been coloured yet.
pub const UNCOLOURED: Colour = Colour::MAX;

/// Largest vertex count / colour-universe size accepted by the builder.
pub const DEFAULT_MAX_ORDER: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub tail: Vertex,
    pub head: Vertex,
    pub colour: Colour,
}

/// One endpoint of an edge together with the edge's colour, as stored in the
/// adjacency indexes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub vertex: Vertex,
    pub colour: Colour,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {0}->{1}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("colour {colour} out of range for kappa = {kappa}")]
    ColourOutOfRange { colour: Colour, kappa: usize },
    #[error("order {0} exceeds the supported maximum {DEFAULT_MAX_ORDER}")]
    TooLarge(usize),
    #[error("edge {0}->{1} is not in the digraph")]
    EdgeNotInGraph(Vertex, Vertex),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredDigraph {
    n: usize,
    kappa: usize,
    out_offsets: Vec<usize>,
    out_arcs: Vec<Arc>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<Arc>,
    in_arcs_by_colour: Vec<Arc>,
    class_offsets: Vec<usize>,
    class_edges: Vec<(Vertex, Vertex)>,
    uncoloured: usize,
}

impl ColouredDigraph {
    /// Builds a digraph from a list of edges, rejecting self-loops,
    /// duplicates and out-of-range ids.
    pub fn from_edges(
        n: usize,
        kappa: usize,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut builder = DigraphBuilder::new(n, kappa)?;
        for e in edges {
            builder.add_edge(e.tail, e.head, e.colour)?;
        }
        builder.build()
    }

    pub fn empty(n: usize, kappa: usize) -> Result<Self, GraphError> {
        DigraphBuilder::new(n, kappa)?.build()
    }

    fn from_sorted(n: usize, kappa: usize, edges: Vec<Edge>) -> Self {
        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        let mut class_offsets = vec![0usize; kappa + 1];
        let mut uncoloured = 0;
        for e in &edges {
            out_offsets[e.tail as usize + 1] += 1;
            in_offsets[e.head as usize + 1] += 1;
            if e.colour == UNCOLOURED {
                uncoloured += 1;
            } else {
                class_offsets[e.colour as usize + 1] += 1;
            }
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        for c in 0..kappa {
            class_offsets[c + 1] += class_offsets[c];
        }

        // `edges` is sorted by (tail, head), so out-arcs come out sorted by head
        // and a counting pass over tails yields in-arcs sorted by tail.
        let out_arcs: Vec<Arc> = edges
            .iter()
            .map(|e| Arc { vertex: e.head, colour: e.colour })
            .collect();
        let placeholder = Arc { vertex: 0, colour: 0 };
        let mut in_arcs = vec![placeholder; edges.len()];
        let mut class_edges = vec![(0, 0); edges.len() - uncoloured];
        let mut in_fill = in_offsets.clone();
        let mut class_fill = class_offsets.clone();
        for e in &edges {
            let slot = &mut in_fill[e.head as usize];
            in_arcs[*slot] = Arc { vertex: e.tail, colour: e.colour };
            *slot += 1;
            if e.colour != UNCOLOURED {
                let slot = &mut class_fill[e.colour as usize];
                class_edges[*slot] = (e.tail, e.head);
                *slot += 1;
            }
        }
        let mut in_arcs_by_colour = in_arcs.clone();
        for v in 0..n {
            in_arcs_by_colour[in_offsets[v]..in_offsets[v + 1]]
                .sort_unstable_by_key(|a| (a.colour, a.vertex));
        }

        ColouredDigraph {
            n,
            kappa,
            out_offsets,
            out_arcs,
            in_offsets,
            in_arcs,
            in_arcs_by_colour,
            class_offsets,
            class_edges,
            uncoloured,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn edge_count(&self) -> usize {
        self.out_arcs.len()
    }

    /// True when every edge carries a colour in `0..kappa`.
    pub fn is_fully_coloured(&self) -> bool {
        self.uncoloured == 0
    }

    /// Out-arcs of `v`, sorted by head.
    pub fn out_arcs(&self, v: Vertex) -> &[Arc] {
        let v = v as usize;
        &self.out_arcs[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// In-arcs of `v`, sorted by tail.
    pub fn in_arcs(&self, v: Vertex) -> &[Arc] {
        let v = v as usize;
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// In-arcs of `v` whose colour is `c`, sorted by tail.
    pub fn in_arcs_with_colour(&self, v: Vertex, c: Colour) -> &[Arc] {
        let v = v as usize;
        let arcs = &self.in_arcs_by_colour[self.in_offsets[v]..self.in_offsets[v + 1]];
        let lo = arcs.partition_point(|a| a.colour < c);
        let hi = lo + arcs[lo..].partition_point(|a| a.colour == c);
        &arcs[lo..hi]
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Colour of the edge `u -> v`, if present.
    pub fn colour(&self, u: Vertex, v: Vertex) -> Option<Colour> {
        if u as usize >= self.n {
            return None;
        }
        let arcs = self.out_arcs(u);
        arcs.binary_search_by_key(&v, |a| a.vertex)
            .ok()
            .map(|i| arcs[i].colour)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.colour(u, v).is_some()
    }

    /// All edges of colour `c` as `(tail, head)` pairs, sorted.
    pub fn colour_class(&self, c: Colour) -> &[(Vertex, Vertex)] {
        let c = c as usize;
        if c >= self.kappa {
            return &[];
        }
        &self.class_edges[self.class_offsets[c]..self.class_offsets[c + 1]]
    }

    /// Edges in `(tail, head)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.n as Vertex).flat_map(move |u| {
            self.out_arcs(u).iter().map(move |a| Edge { tail: u, head: a.vertex, colour: a.colour })
        })
    }

    /// Same edge set with colours replaced, in `edges()` order.
    pub fn recoloured(
        &self,
        kappa: usize,
        mut colour_of: impl FnMut(Edge) -> Colour,
    ) -> Result<Self, GraphError> {
        if kappa > DEFAULT_MAX_ORDER {
            return Err(GraphError::TooLarge(kappa));
        }
        let mut edges = Vec::with_capacity(self.edge_count());
        for e in self.edges() {
            let colour = colour_of(e);
            if colour != UNCOLOURED && colour as usize >= kappa {
                return Err(GraphError::ColourOutOfRange { colour, kappa });
            }
            edges.push(Edge { colour, ..e });
        }
        Ok(Self::from_sorted(self.n, kappa, edges))
    }

    /// Subgraph spanned by edges with both ends in `vertices` and colour in
    /// `colours`. Vertex ids are preserved.
    pub fn restricted(&self, vertices: &FixedBitSet, colours: &FixedBitSet) -> Self {
        let edges = self
            .edges()
            .filter(|e| {
                vertices.contains(e.tail as usize)
                    && vertices.contains(e.head as usize)
                    && e.colour != UNCOLOURED
                    && colours.contains(e.colour as usize)
            })
            .collect();
        Self::from_sorted(self.n, self.kappa, edges)
    }

    /// Minimum over all vertices of min(in-degree, out-degree).
    pub fn min_semidegree(&self) -> usize {
        (0..self.n as Vertex)
            .map(|v| self.in_degree(v).min(self.out_degree(v)))
            .min()
            .unwrap_or(0)
    }

    pub fn vertex_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.n);
        s.insert_range(..);
        s
    }

    pub fn colour_set(&self) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(self.kappa);
        s.insert_range(..);
        s
    }
}

/// Accumulates edges and validates them on [`DigraphBuilder::build`].
#[derive(Debug, Clone)]
pub struct DigraphBuilder {
    n: usize,
    kappa: usize,
    edges: Vec<Edge>,
    overrides: HashMap<(Vertex, Vertex), Colour>,
}

impl DigraphBuilder {
    pub fn new(n: usize, kappa: usize) -> Result<Self, GraphError> {
        if n > DEFAULT_MAX_ORDER {
            return Err(GraphError::TooLarge(n));
        }
        if kappa > DEFAULT_MAX_ORDER {
            return Err(GraphError::TooLarge(kappa));
        }
        Ok(DigraphBuilder { n, kappa, edges: Vec::new(), overrides: HashMap::new() })
    }

    /// Starts from an existing digraph; further `add_edge` calls that repeat
    /// one of its edges are duplicates.
    pub fn from_digraph(d: &ColouredDigraph) -> Self {
        DigraphBuilder {
            n: d.n,
            kappa: d.kappa,
            edges: d.edges().collect(),
            overrides: HashMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    fn check(&self, u: Vertex, v: Vertex, c: Colour) -> Result<(), GraphError> {
        for x in [u, v] {
            if x as usize >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: x, n: self.n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if c != UNCOLOURED && c as usize >= self.kappa {
            return Err(GraphError::ColourOutOfRange { colour: c, kappa: self.kappa });
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex, c: Colour) -> Result<&mut Self, GraphError> {
        self.check(u, v, c)?;
        self.edges.push(Edge { tail: u, head: v, colour: c });
        Ok(self)
    }

    /// Inserts `u -> v` with colour `c`, or recolours it if already present.
    pub fn upsert_edge(&mut self, u: Vertex, v: Vertex, c: Colour) -> Result<&mut Self, GraphError> {
        self.check(u, v, c)?;
        self.overrides.insert((u, v), c);
        Ok(self)
    }

    pub fn build(mut self) -> Result<ColouredDigraph, GraphError> {
        self.edges.sort_unstable_by_key(|e| (e.tail, e.head));
        if let Some(w) = self.edges.windows(2).find(|w| (w[0].tail, w[0].head) == (w[1].tail, w[1].head)) {
            return Err(GraphError::DuplicateEdge(w[0].tail, w[0].head));
        }
        if !self.overrides.is_empty() {
            for e in self.edges.iter_mut() {
                if let Some(c) = self.overrides.remove(&(e.tail, e.head)) {
                    e.colour = c;
                }
            }
            self.edges.extend(
                self.overrides.drain().map(|((tail, head), colour)| Edge { tail, head, colour }),
            );
            self.edges.sort_unstable_by_key(|e| (e.tail, e.head));
        }
        Ok(ColouredDigraph::from_sorted(self.n, self.kappa, self.edges))
    }
}

/// Complete bidirected digraph on `n` vertices with every edge uncoloured.
pub fn complete_bidirected(n: usize, kappa: usize) -> Result<ColouredDigraph, GraphError> {
    let mut b = DigraphBuilder::new(n, kappa)?;
    b.edges.reserve(n * n.saturating_sub(1));
    for u in 0..n as Vertex {
        for v in 0..n as Vertex {
            if u != v {
                b.edges.push(Edge { tail: u, head: v, colour: UNCOLOURED });
            }
        }
    }
    b.build()
}

/// Set with the given members and capacity `len`.
pub fn bitset_of(len: usize, members: impl IntoIterator<Item = u32>) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(len);
    for x in members {
        s.insert(x as usize);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bipartite_bidirected(a: usize, b: usize) -> ColouredDigraph {
        let n = a + b;
        let mut builder = DigraphBuilder::new(n, 1).unwrap();
        for u in 0..a as Vertex {
            for v in a as Vertex..n as Vertex {
                builder.add_edge(u, v, 0).unwrap();
                builder.add_edge(v, u, 0).unwrap();
            }
        }
        builder.build().unwrap()
    }

    #[test]
    fn semidegree_of_complete_digraph() {
        let d = complete_bidirected(4, 1).unwrap();
        assert_eq!(d.edge_count(), 12);
        assert_eq!(d.min_semidegree(), 3);
    }

    #[test]
    fn semidegree_of_extremal_bipartite() {
        let d = bipartite_bidirected(2, 6);
        assert_eq!(d.edge_count(), 24);
        assert_eq!(d.min_semidegree(), 2);
    }

    #[test]
    fn semidegree_with_isolated_vertex() {
        let d = ColouredDigraph::from_edges(
            3,
            1,
            [Edge { tail: 0, head: 1, colour: 0 }, Edge { tail: 1, head: 0, colour: 0 }],
        )
        .unwrap();
        assert_eq!(d.min_semidegree(), 0);
    }

    #[test]
    fn builder_rejects_bad_edges() {
        let mut b = DigraphBuilder::new(3, 2).unwrap();
        assert_eq!(b.add_edge(1, 1, 0).unwrap_err(), GraphError::SelfLoop(1));
        assert!(matches!(b.add_edge(0, 3, 0), Err(GraphError::VertexOutOfRange { .. })));
        assert!(matches!(b.add_edge(0, 1, 2), Err(GraphError::ColourOutOfRange { .. })));
        b.add_edge(0, 1, 0).unwrap();
        b.add_edge(1, 0, 1).unwrap();
        b.add_edge(0, 1, 1).unwrap();
        assert_eq!(b.build().unwrap_err(), GraphError::DuplicateEdge(0, 1));
    }

    #[test]
    fn indexes_agree() {
        let mut b = DigraphBuilder::new(4, 3).unwrap();
        for (u, v, c) in [(0, 1, 2), (2, 1, 0), (3, 1, 2), (1, 0, 1), (0, 2, 0)] {
            b.add_edge(u, v, c).unwrap();
        }
        let d = b.build().unwrap();
        assert_eq!(d.colour(2, 1), Some(0));
        assert_eq!(d.colour(1, 2), None);
        let with_two: Vec<_> = d.in_arcs_with_colour(1, 2).iter().map(|a| a.vertex).collect();
        assert_eq!(with_two, vec![0, 3]);
        assert_eq!(d.colour_class(0), &[(0, 2), (2, 1)]);
        let tails: Vec<_> = d.in_arcs(1).iter().map(|a| a.vertex).collect();
        assert_eq!(tails, vec![0, 2, 3]);
    }

    #[test]
    fn upsert_recolours_and_inserts() {
        let mut b = DigraphBuilder::new(3, 3).unwrap();
        b.add_edge(0, 1, 0).unwrap();
        b.upsert_edge(0, 1, 2).unwrap();
        b.upsert_edge(1, 2, 1).unwrap();
        let d = b.build().unwrap();
        assert_eq!(d.colour(0, 1), Some(2));
        assert_eq!(d.colour(1, 2), Some(1));
        assert_eq!(d.edge_count(), 2);
    }
}
