//! Exact rainbow Hamilton cycle solvers.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use super::{require_coloured, SearchError};
use crate::graph::{verify_rainbow_hamilton_cycle, ColouredDigraph, Vertex};

pub const BRUTE_FORCE_MAX_N: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Found,
    NotFound,
    BudgetExhausted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub cycle: Option<Vec<Vertex>>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn found(&self) -> bool {
        self.status == SolveStatus::Found
    }
}

struct Backtrack<'a> {
    d: &'a ColouredDigraph,
    budget: u64,
    nodes: u64,
    path: Vec<Vertex>,
    visited: FixedBitSet,
    used: FixedBitSet,
}

enum Step {
    Found,
    Exhausted,
    Dead,
}

impl Backtrack<'_> {
    fn colour_free(&self, c: u32) -> bool {
        !self.used.contains(c as usize)
    }

    /// Every unvisited vertex still needs a feasible predecessor (the
    /// current end or another unvisited vertex) and a feasible successor
    /// (the start or another unvisited vertex).
    fn feasible(&self, last: Vertex) -> bool {
        let start = self.path[0];
        for w in (0..self.d.n()).filter(|&w| !self.visited.contains(w)) {
            let w = w as Vertex;
            let has_in = self.d.in_arcs(w).iter().any(|a| {
                (a.vertex == last || !self.visited.contains(a.vertex as usize)) && self.colour_free(a.colour)
            });
            let has_out = self.d.out_arcs(w).iter().any(|a| {
                (a.vertex == start || !self.visited.contains(a.vertex as usize)) && self.colour_free(a.colour)
            });
            if !has_in || !has_out {
                return false;
            }
        }
        true
    }

    fn residual_out_degree(&self, v: Vertex) -> usize {
        self.d
            .out_arcs(v)
            .iter()
            .filter(|a| !self.visited.contains(a.vertex as usize) && self.colour_free(a.colour))
            .count()
    }

    fn extend(&mut self) -> Step {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Step::Exhausted;
        }
        let n = self.d.n();
        let last = *self.path.last().unwrap();
        if self.path.len() == n {
            return match self.d.colour(last, self.path[0]) {
                Some(c) if self.colour_free(c) => Step::Found,
                _ => Step::Dead,
            };
        }
        let remaining_edges = n - self.path.len() + 1;
        if self.d.kappa() - self.used.count_ones(..) < remaining_edges || !self.feasible(last) {
            return Step::Dead;
        }
        let mut options: Vec<(usize, Vertex, u32)> = self
            .d
            .out_arcs(last)
            .iter()
            .filter(|a| !self.visited.contains(a.vertex as usize) && self.colour_free(a.colour))
            .map(|a| (self.residual_out_degree(a.vertex), a.vertex, a.colour))
            .collect();
        options.sort_unstable();
        for (_, v, c) in options {
            self.visited.insert(v as usize);
            self.used.insert(c as usize);
            self.path.push(v);
            match self.extend() {
                Step::Dead => {}
                done => return done,
            }
            self.path.pop();
            self.used.set(c as usize, false);
            self.visited.set(v as usize, false);
        }
        Step::Dead
    }
}

/// Backtracking search from vertex 0 with fail-first branching and
/// residual-degree pruning. `budget` caps node expansions; `None` means
/// unlimited.
pub fn exact_rainbow_hc(d: &ColouredDigraph, budget: Option<u64>) -> Result<SolveOutcome, SearchError> {
    require_coloured(d)?;
    let started = Instant::now();
    let n = d.n();
    if n < 2 || d.kappa() < n {
        return Ok(SolveOutcome {
            status: SolveStatus::NotFound,
            cycle: None,
            stats: SolveStats { nodes: 0, elapsed_ms: ms_since(started) },
        });
    }
    let mut bt = Backtrack {
        d,
        budget: budget.unwrap_or(u64::MAX),
        nodes: 0,
        path: vec![0],
        visited: FixedBitSet::with_capacity(n),
        used: FixedBitSet::with_capacity(d.kappa()),
    };
    bt.visited.insert(0);
    let step = bt.extend();
    let (status, cycle) = match step {
        Step::Found => (SolveStatus::Found, Some(bt.path.clone())),
        Step::Dead => (SolveStatus::NotFound, None),
        Step::Exhausted => (SolveStatus::BudgetExhausted, None),
    };
    if let Some(c) = &cycle {
        debug_assert!(verify_rainbow_hamilton_cycle(d, c).accepted);
    }
    Ok(SolveOutcome { status, cycle, stats: SolveStats { nodes: bt.nodes, elapsed_ms: ms_since(started) } })
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Tries every cyclic order starting at 0 (lexicographically) and returns
/// the first rainbow Hamilton cycle.
pub fn brute_force_rainbow_hc(d: &ColouredDigraph) -> Result<SolveOutcome, SearchError> {
    require_coloured(d)?;
    let n = d.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(SearchError::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    let started = Instant::now();
    let mut nodes = 0u64;
    let mut found = None;
    if n >= 2 {
        let mut order: Vec<Vertex> = (0..n as Vertex).collect();
        loop {
            nodes += 1;
            if verify_rainbow_hamilton_cycle(d, &order).accepted {
                found = Some(order.clone());
                break;
            }
            if !next_permutation(&mut order[1..]) {
                break;
            }
        }
    }
    Ok(SolveOutcome {
        status: if found.is_some() { SolveStatus::Found } else { SolveStatus::NotFound },
        cycle: found,
        stats: SolveStats { nodes, elapsed_ms: ms_since(started) },
    })
}

fn next_permutation(xs: &mut [Vertex]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}
