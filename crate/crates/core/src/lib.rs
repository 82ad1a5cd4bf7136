//! Rainbow Hamilton cycles in uniformly coloured randomly perturbed digraphs.
//!
//! The crate is organised bottom-up: [`graph`] holds the coloured digraph
//! model and verifiers, [`models`] samples random instances, [`search`] has
//! the DFS and exact solvers, [`matching`] the matching subroutines,
//! [`absorber`] the 13-vertex gadget, [`rmbg`] the bipartite templates,
//! [`pipeline`] the full absorption construction and [`harness`] the
//! Monte-Carlo experiment runner.

pub mod absorber;
pub mod graph;
pub mod harness;
pub mod matching;
pub mod models;
pub mod pipeline;
pub mod rmbg;
pub mod rng;
pub mod search;

pub use graph::{ColouredDigraph, DigraphBuilder, DirectedPath, Edge, Verdict, Violation};
pub use rng::{RngStream, StreamLabel};
