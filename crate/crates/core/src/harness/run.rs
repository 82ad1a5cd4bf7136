use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{wilson_interval, Z95};
use super::{config, Cell, ExperimentConfig, ExperimentKind, ExperimentRow, ExperimentTable, HarnessError, SolverConfig};
use crate::graph::{read_graph_file, verify_rainbow_hamilton_cycle, ColouredDigraph, Vertex};
use crate::models::{complete_bipartite_graph, complete_graph, sample_gamma, sample_model, ModelParams, SeedKind};
use crate::pipeline::{assemble_hamilton_cycle, PipelineError, Stage};
use crate::rng::{RngStream, StreamLabel};
use crate::search::{brute_force_rainbow_hc, exact_rainbow_hc, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "stage", rename_all = "kebab-case")]
pub enum Outcome {
    Found,
    NotFound,
    BudgetExhausted,
    PipelineFailure(Stage),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub cell: usize,
    pub trial: u64,
    pub outcome: Outcome,
    pub wall_ms: f64,
}

/// Stream of trial `trial` in the cell with hash `cell_hash`. The state is
/// splitmix64 folded over (master ^ fnv1a64("trial"), cell_hash, trial).
pub fn trial_stream(master_seed: u64, cell_hash: u64, trial: u64) -> RngStream {
    RngStream::new(master_seed, StreamLabel::new("trial").with(cell_hash).with(trial))
}

/// Undirected base graph of the chain for a seed kind.
fn chain_base(m: &ModelParams) -> Result<ColouredDigraph, HarnessError> {
    Ok(match &m.seed_kind {
        SeedKind::CompleteBidirected => complete_graph(m.n)?,
        SeedKind::CompleteBipartiteBidirected => {
            complete_bipartite_graph((m.delta * m.n as f64).floor() as usize, m.n)?
        }
        SeedKind::FromFile(p) => read_graph_file(p).map_err(crate::models::ModelError::from)?,
        SeedKind::RandomSemidegree => return Err(config("random-semidegree has no undirected base graph")),
    })
}

fn solve(
    d: &ColouredDigraph,
    solver: &SolverConfig,
    stream: &RngStream,
) -> Result<(Outcome, Option<Vec<Vertex>>), HarnessError> {
    let from = |status: SolveStatus| match status {
        SolveStatus::Found => Outcome::Found,
        SolveStatus::NotFound => Outcome::NotFound,
        SolveStatus::BudgetExhausted => Outcome::BudgetExhausted,
    };
    Ok(match solver {
        SolverConfig::Brute {} => {
            let o = brute_force_rainbow_hc(d)?;
            (from(o.status), o.cycle)
        }
        SolverConfig::Exact { budget } => {
            let o = exact_rainbow_hc(d, *budget)?;
            (from(o.status), o.cycle)
        }
        SolverConfig::Pipeline { params } => match assemble_hamilton_cycle(d, params, stream) {
            Ok(a) => (Outcome::Found, Some(a.cycle)),
            Err(PipelineError::Failure(f)) => (Outcome::PipelineFailure(f.stage), None),
            Err(PipelineError::Input(msg)) => return Err(config(msg)),
        },
    })
}

fn run_one(cfg: &ExperimentConfig, cells: &[Cell], base: &[Option<ColouredDigraph>], ci: usize, trial: u64) -> Result<TrialResult, HarnessError> {
    let cell = &cells[ci];
    let stream = trial_stream(cfg.master_seed, cell.hash(cfg.kind), trial);
    let started = Instant::now();
    let m = &cell.model;
    let d = match (cfg.kind, cell.chain_index) {
        (ExperimentKind::Coupling, Some(i)) => {
            let g0 = base[ci].as_ref().expect("coupling cells carry a base graph");
            sample_gamma(g0, i, m.c, m.kappa(), &mut stream.named("instance").rng())?
        }
        _ => sample_model(m, &mut stream.named("instance").rng())?,
    };
    let (outcome, cycle) = solve(&d, &cfg.solver, &stream.named("solver"))?;
    // Successes only count once the verifier agrees.
    if outcome == Outcome::Found {
        let ok = cycle.as_deref().is_some_and(|c| verify_rainbow_hamilton_cycle(&d, c).accepted);
        if !ok {
            return Err(HarnessError::Unverified { cell: cell.label(cfg.kind), trial });
        }
    }
    Ok(TrialResult { cell: ci, trial, outcome, wall_ms: started.elapsed().as_secs_f64() * 1e3 })
}

/// Every trial of every cell, ordered by (cell, trial) whatever the
/// completion order.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<(Vec<Cell>, Vec<TrialResult>), HarnessError> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let base = cells
        .iter()
        .map(|c| match cfg.kind {
            ExperimentKind::Coupling => chain_base(&c.model).map(Some),
            ExperimentKind::Threshold => Ok(None),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let results = jobs
        .par_iter()
        .map(|&(c, t)| run_one(cfg, &cells, &base, c, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((cells, results))
}

/// Folds per-trial results into one row per cell, in cell order.
pub fn aggregate(cfg: &ExperimentConfig, cells: &[Cell], results: &[TrialResult]) -> ExperimentTable {
    let rows = cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let mine: Vec<&TrialResult> = results.iter().filter(|r| r.cell == ci).collect();
            let trials = mine.len() as u64;
            let count = |o: Outcome| mine.iter().filter(|r| r.outcome == o).count() as u64;
            let successes = count(Outcome::Found);
            let mut pipeline_failures = BTreeMap::new();
            for r in &mine {
                if let Outcome::PipelineFailure(s) = r.outcome {
                    *pipeline_failures.entry(s.tag().to_string()).or_insert(0) += 1;
                }
            }
            let (wilson_lo, wilson_hi) = wilson_interval(successes, trials, Z95);
            let mean_ms = (cfg.record_timing && trials > 0)
                .then(|| mine.iter().map(|r| r.wall_ms).sum::<f64>() / trials as f64);
            let m = &cell.model;
            ExperimentRow {
                kind: cfg.kind,
                n: m.n,
                delta: m.delta,
                c: m.c,
                q: m.q,
                seed_kind: m.seed_kind.clone(),
                chain_index: cell.chain_index,
                solver: cfg.solver.tag().to_string(),
                trials,
                successes,
                proportion: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
                wilson_lo,
                wilson_hi,
                mean_ms,
                not_found: count(Outcome::NotFound),
                budget_exhausted: count(Outcome::BudgetExhausted),
                pipeline_failures,
            }
        })
        .collect();
    ExperimentTable { rows }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable, HarnessError> {
    let (cells, results) = run_trials(cfg)?;
    Ok(aggregate(cfg, &cells, &results))
}

pub fn run_threshold_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable, HarnessError> {
    if cfg.kind != ExperimentKind::Threshold {
        return Err(config("expected a threshold config"));
    }
    run_experiment(cfg)
}

pub fn run_coupling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTable, HarnessError> {
    if cfg.kind != ExperimentKind::Coupling {
        return Err(config("expected a coupling config"));
    }
    run_experiment(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn bipartite_seed_without_perturbation_never_succeeds() {
        // Parts of size 1 and 5: every Hamilton cycle alternates sides.
        let c = cfg(r#"{"kind": "threshold",
            "grid": {"n": [6], "delta": [0.25], "C": [0], "q": [1], "seed_kind": ["complete-bipartite-bidirected"]},
            "solver": {"kind": "brute"}, "trials": 20, "master_seed": 3}"#);
        let t = run_threshold_experiment(&c).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].successes, t.rows[0].not_found, t.rows[0].trials), (0, 20, 20));
        assert_eq!(t.rows[0].wilson_lo, 0.0);
    }

    #[test]
    fn reruns_match_and_counts_add_up() {
        let c = cfg(r#"{"kind": "threshold",
            "grid": {"n": [7], "delta": [1], "C": [0], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "brute"}, "trials": 200, "master_seed": 9}"#);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a, b);
        let r = &a.rows[0];
        assert_eq!(r.successes + r.not_found + r.budget_exhausted, r.trials);
        assert_eq!(r.proportion * r.trials as f64, r.successes as f64);
        assert!(r.wilson_lo <= r.proportion && r.proportion <= r.wilson_hi);
        assert!(r.mean_ms.is_none());
    }

    #[test]
    fn exhausted_budget_is_its_own_outcome() {
        let c = cfg(r#"{"kind": "threshold",
            "grid": {"n": [12], "delta": [1], "C": [0], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "exact", "budget": 1}, "trials": 5, "master_seed": 0}"#);
        let r = &run_experiment(&c).unwrap().rows[0];
        assert_eq!(r.budget_exhausted, 5);
        assert_eq!(r.successes, 0);
    }

    #[test]
    fn pipeline_failures_are_tallied_by_stage() {
        // Far too small for any absorbing structure.
        let c = cfg(r#"{"kind": "threshold",
            "grid": {"n": [200], "delta": [1], "C": [0], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "pipeline", "params": {"mu": 0.05}}, "trials": 2, "master_seed": 0}"#);
        let r = &run_experiment(&c).unwrap().rows[0];
        assert_eq!(r.pipeline_failures.get("absorbing-structure"), Some(&2));
        assert_eq!(r.successes, 0);
    }

    #[test]
    fn coupling_rows_follow_indices() {
        let c = cfg(r#"{"kind": "coupling",
            "grid": {"n": [5], "delta": [1], "C": [2], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "brute"}, "trials": 50, "master_seed": 4, "chain_indices": [0, "mid", "end"]}"#);
        let t = run_coupling_experiment(&c).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.chain_index).collect::<Vec<_>>(), vec![Some(0), Some(5), Some(10)]);
        assert!(run_threshold_experiment(&c).is_err());
    }

    #[test]
    fn timing_is_opt_in() {
        let mut c = cfg(r#"{"kind": "threshold",
            "grid": {"n": [5], "delta": [1], "C": [0], "q": [1], "seed_kind": ["complete-bidirected"]},
            "solver": {"kind": "brute"}, "trials": 4, "master_seed": 4}"#);
        c.record_timing = true;
        assert!(run_experiment(&c).unwrap().rows[0].mean_ms.is_some());
    }
}
