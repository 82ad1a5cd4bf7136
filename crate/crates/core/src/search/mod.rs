//! Rainbow path and cycle search.

mod dfs;
mod exact;
mod spread;

pub use dfs::{rainbow_dfs_path, rainbow_dfs_path_within};
pub use exact::{brute_force_rainbow_hc, exact_rainbow_hc, SolveOutcome, SolveStats, SolveStatus, BRUTE_FORCE_MAX_N};
pub use spread::{
    binomial, colour_spread_exhaustive, colour_spread_ok, colour_spread_sampled, SpreadMode,
    SpreadReport, SPREAD_EXHAUSTIVE_LIMIT,
};

use thiserror::Error;

use crate::graph::ColouredDigraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("digraph has uncoloured edges")]
    Uncoloured,
    #[error("n = {n} exceeds the brute-force limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("k = {k} too large: need 1 <= k and 2k <= n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("exhaustive check needs {pairs} set pairs, over the limit {limit}")]
    OverBudget { pairs: u128, limit: u128 },
}

pub(crate) fn require_coloured(d: &ColouredDigraph) -> Result<(), SearchError> {
    if d.is_fully_coloured() {
        Ok(())
    } else {
        Err(SearchError::Uncoloured)
    }
}
