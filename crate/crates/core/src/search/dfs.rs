//! Depth-first search for a long rainbow path.
//!
//! The search keeps a path stack and a set of reserved colours. From the
//! top of the stack it follows the next untried out-edge (ascending head)
//! whose head is unvisited and whose colour is neither on the stack nor
//! reserved. When a vertex is popped, the colour of the edge that reached
//! it becomes reserved for good. The forbidden colour set therefore only
//! grows, which is what makes skipping an edge once final.
//!
//! If every two disjoint k-sets X, Y see at least n colours from X to Y,
//! the longest stack reached has at least n - 2k edges: at any moment
//! every edge from a finished vertex to an unvisited one has a forbidden
//! colour, and there are fewer than n forbidden colours, so finished and
//! unvisited sets cannot both reach size k.

use fixedbitset::FixedBitSet;

use super::{require_coloured, SearchError};
use crate::graph::{Colour, ColouredDigraph, DirectedPath, Vertex};

/// Longest rainbow path found by the reserved-colour DFS over all of `d`.
pub fn rainbow_dfs_path(d: &ColouredDigraph) -> Result<DirectedPath, SearchError> {
    rainbow_dfs_path_within(d, &d.vertex_set(), &d.colour_set())
}

/// Same search restricted to vertices in `vertices` and colours in
/// `colours`, without building the subgraph.
pub fn rainbow_dfs_path_within(
    d: &ColouredDigraph,
    vertices: &FixedBitSet,
    colours: &FixedBitSet,
) -> Result<DirectedPath, SearchError> {
    require_coloured(d)?;
    let n = d.n();
    let mut visited = FixedBitSet::with_capacity(n);
    let mut forbidden = FixedBitSet::with_capacity(d.kappa());
    let mut cursor = vec![0usize; n];
    // Stack of (vertex, colour of the edge that reached it).
    let mut stack: Vec<(Vertex, Option<Colour>)> = Vec::new();
    let mut best: Vec<Vertex> = Vec::new();

    let allowed_colour = |c: Colour| (c as usize) < colours.len() && colours.contains(c as usize);

    for root in vertices.ones().filter(|&v| v < n).map(|v| v as Vertex) {
        if visited.contains(root as usize) {
            continue;
        }
        visited.insert(root as usize);
        stack.push((root, None));
        if best.is_empty() {
            best.push(root);
        }
        while let Some(&(top, _)) = stack.last() {
            let arcs = d.out_arcs(top);
            let i = &mut cursor[top as usize];
            let mut next = None;
            while *i < arcs.len() {
                let a = arcs[*i];
                *i += 1;
                let h = a.vertex as usize;
                if h < vertices.len()
                    && vertices.contains(h)
                    && !visited.contains(h)
                    && allowed_colour(a.colour)
                    && !forbidden.contains(a.colour as usize)
                {
                    next = Some(a);
                    break;
                }
            }
            match next {
                Some(a) => {
                    visited.insert(a.vertex as usize);
                    forbidden.insert(a.colour as usize);
                    stack.push((a.vertex, Some(a.colour)));
                    if stack.len() > best.len() {
                        best.clear();
                        best.extend(stack.iter().map(|&(v, _)| v));
                    }
                }
                // The colour of a popped edge stays forbidden.
                None => {
                    stack.pop();
                }
            }
        }
    }
    Ok(DirectedPath::new(best).expect("stack holds distinct vertices"))
}
