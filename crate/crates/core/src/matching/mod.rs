//! Matching subroutines over hypergraphs, bipartite graphs and colour
//! classes of a digraph.

mod bipartite;
mod families;
mod hypergraph;

pub use bipartite::{max_bipartite_matching, max_general_matching};
pub use families::{
    rainbow_path_family, rainbow_triangle_family, PathFamily, TriangleFamily, TriangleOrientation,
};
pub(crate) use families::{in_set, triangle_attempt, triangle_first_arcs};
pub use hypergraph::{
    brute_force_max_matching, greedy_maximal_matching, sample_and_match, Hypergraph, SampleMode,
    BRUTE_FORCE_MAX_EDGES,
};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Colour, ColouredDigraph, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchingError {
    #[error("uniformity {0} is below 2")]
    Uniformity(usize),
    #[error("edge {0} has the wrong size, repeated or out-of-range vertices")]
    BadEdge(usize),
    #[error("{edges} edges exceed the brute-force limit {max}")]
    TooManyEdges { edges: usize, max: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("path endpoints coincide at {0}")]
    SameEndpoints(Vertex),
}

/// A set of directed edges with pairwise distinct endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMatching {
    pub edges: Vec<(Vertex, Vertex)>,
}

impl EdgeMatching {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_vertex_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|&(u, v)| u != v && seen.insert(u) && seen.insert(v))
    }
}

/// Maximum matching among edges of colour `c` from `xs` to `ys`. When the
/// two sets overlap, the problem is a general matching and blossoms are
/// needed; otherwise bipartite augmenting paths suffice.
pub fn monochromatic_matching(
    d: &ColouredDigraph,
    c: Colour,
    xs: &FixedBitSet,
    ys: &FixedBitSet,
) -> EdgeMatching {
    let class: Vec<(Vertex, Vertex)> = d
        .colour_class(c)
        .iter()
        .copied()
        .filter(|&(u, v)| in_set(xs, u) && in_set(ys, v))
        .collect();
    if class.is_empty() {
        return EdgeMatching::default();
    }
    let overlap = xs.intersection(ys).next().is_some();
    let mut edges = Vec::new();
    if overlap {
        let n = d.n();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &class {
            adj[u as usize].push(v as usize);
            adj[v as usize].push(u as usize);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        let mate = max_general_matching(&adj);
        for (a, &m) in mate.iter().enumerate() {
            let Some(b) = m else { continue };
            if a < b {
                let (a, b) = (a as Vertex, b as Vertex);
                // Prefer the orientation with the smaller tail.
                let e = if class.binary_search(&(a, b)).is_ok() { (a, b) } else { (b, a) };
                edges.push(e);
            }
        }
    } else {
        let mut lefts: Vec<Vertex> = class.iter().map(|e| e.0).collect();
        lefts.dedup();
        let mut rights: Vec<Vertex> = class.iter().map(|e| e.1).collect();
        rights.sort_unstable();
        rights.dedup();
        let mut adj = vec![Vec::new(); lefts.len()];
        for &(u, v) in &class {
            let li = lefts.binary_search(&u).unwrap();
            adj[li].push(rights.binary_search(&v).unwrap());
        }
        let m = max_bipartite_matching(rights.len(), &adj);
        for (li, r) in m.iter().enumerate() {
            if let Some(r) = r {
                edges.push((lefts[li], rights[*r]));
            }
        }
    }
    edges.sort_unstable();
    EdgeMatching { edges }
}
