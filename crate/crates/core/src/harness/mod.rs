//! Monte-Carlo experiments: threshold sweeps over the perturbed model and
//! success estimates along the interpolating chain.
//!
//! Every trial owns an RNG stream labelled by (cell hash, trial index), so
//! tables are reproducible byte for byte whatever the thread count.

mod output;
mod run;
mod stats;

pub use output::{emit_results, read_json, write_csv, write_json, OutputFormat, CSV_HEADER};
pub use run::{
    aggregate, run_coupling_experiment, run_experiment, run_threshold_experiment, run_trials,
    trial_stream, Outcome, TrialResult,
};
pub use stats::{wilson_interval, Z95};

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{chain_length, ModelError, ModelParams, SeedKind};
use crate::pipeline::PipelineParams;
use crate::rng::fnv1a64;
use crate::search::{SearchError, BRUTE_FORCE_MAX_N};

/// The exact solver without a node budget is only accepted up to this order.
pub const EXACT_UNBUDGETED_MAX_N: usize = 24;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("solver reported a cycle the verifier rejects in cell {cell}, trial {trial}")]
    Unverified { cell: String, trial: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn config(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Threshold,
    Coupling,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::Coupling => "coupling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolverConfig {
    Exact {
        #[serde(default)]
        budget: Option<u64>,
    },
    Brute {},
    Pipeline {
        #[serde(default)]
        params: PipelineParams,
    },
}

impl SolverConfig {
    pub fn tag(&self) -> &'static str {
        match self {
            SolverConfig::Exact { .. } => "exact",
            SolverConfig::Brute {} => "brute",
            SolverConfig::Pipeline { .. } => "pipeline",
        }
    }
}

/// Cartesian grid, expanded in the order n, delta, C, q, seed kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelGrid {
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub q: Vec<f64>,
    pub seed_kind: Vec<SeedKind>,
}

/// Position on the chain: a literal index, the midpoint or the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainIndex {
    At(usize),
    Named(ChainPoint),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainPoint {
    Mid,
    End,
}

impl ChainIndex {
    pub fn resolve(self, n: usize) -> usize {
        let len = chain_length(n);
        match self {
            ChainIndex::At(i) => i,
            ChainIndex::Named(ChainPoint::Mid) => len / 2,
            ChainIndex::Named(ChainPoint::End) => len,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: ModelGrid,
    pub solver: SolverConfig,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Chain positions, coupling experiments only.
    #[serde(default)]
    pub chain_indices: Vec<ChainIndex>,
    /// Fill `mean_ms`; off by default because timings break byte-identical
    /// reruns.
    #[serde(default)]
    pub record_timing: bool,
}

/// One grid point; for coupling runs `chain_index` is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub model: ModelParams,
    pub chain_index: Option<usize>,
}

impl Cell {
    /// Canonical label hashed into trial seeds. Floats print in shortest
    /// round-trip form, so equal configs give equal labels.
    pub fn label(&self, kind: ExperimentKind) -> String {
        let m = &self.model;
        let mut s = format!(
            "{}|n={}|delta={}|C={}|q={}|seed={}",
            kind.tag(),
            m.n,
            m.delta,
            m.c,
            m.q,
            m.seed_kind.tag()
        );
        if let Some(i) = self.chain_index {
            s.push_str(&format!("|chain={i}"));
        }
        s
    }

    pub fn hash(&self, kind: ExperimentKind) -> u64 {
        fnv1a64(self.label(kind).as_bytes())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid cells in output order. Combinations with C > n, which the
    /// model cannot realise, are skipped; every other invalid combination is
    /// an error.
    pub fn cells(&self) -> Result<Vec<Cell>, HarnessError> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &n in &g.n {
            for &delta in &g.delta {
                for &c in &g.c {
                    for &q in &g.q {
                        for seed_kind in &g.seed_kind {
                            if c > n as f64 {
                                continue;
                            }
                            let model = ModelParams { n, delta, c, q, seed_kind: seed_kind.clone() };
                            model.validate()?;
                            match self.kind {
                                ExperimentKind::Threshold => out.push(Cell { model, chain_index: None }),
                                ExperimentKind::Coupling => {
                                    for ix in &self.chain_indices {
                                        out.push(Cell { model: model.clone(), chain_index: Some(ix.resolve(n)) });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        let g = &self.grid;
        if g.n.is_empty() || g.delta.is_empty() || g.c.is_empty() || g.q.is_empty() || g.seed_kind.is_empty() {
            return Err(config("every grid axis needs at least one value"));
        }
        let max_n = *g.n.iter().max().expect("non-empty");
        match &self.solver {
            SolverConfig::Brute {} if max_n > BRUTE_FORCE_MAX_N => {
                return Err(config(format!("brute solver needs n <= {BRUTE_FORCE_MAX_N}, grid has {max_n}")));
            }
            SolverConfig::Exact { budget: None } if max_n > EXACT_UNBUDGETED_MAX_N => {
                return Err(config(format!(
                    "exact solver without a budget needs n <= {EXACT_UNBUDGETED_MAX_N}, grid has {max_n}"
                )));
            }
            SolverConfig::Pipeline { params } => {
                if self.kind == ExperimentKind::Coupling {
                    return Err(config("coupling experiments need the brute or exact solver"));
                }
                for &n in &g.n {
                    if g.q.iter().any(|&q| (q * n as f64).round() as usize != n) {
                        return Err(config("the pipeline needs kappa = n"));
                    }
                    params.validate(n).map_err(|e| config(e.to_string()))?;
                }
            }
            _ => {}
        }
        match self.kind {
            ExperimentKind::Threshold if !self.chain_indices.is_empty() => {
                return Err(config("chain_indices only apply to coupling experiments"));
            }
            ExperimentKind::Coupling => {
                if self.chain_indices.is_empty() {
                    return Err(config("coupling experiments need chain_indices"));
                }
                if g.seed_kind.iter().any(|k| matches!(k, SeedKind::RandomSemidegree)) {
                    return Err(config("the chain needs an undirected base graph; random-semidegree is directed"));
                }
                for &n in &g.n {
                    for ix in &self.chain_indices {
                        let (i, max) = (ix.resolve(n), chain_length(n));
                        if i > max {
                            return Err(config(format!("chain index {i} outside 0..={max} for n = {n}")));
                        }
                    }
                }
            }
            _ => {}
        }
        if self.cells()?.is_empty() {
            return Err(config("grid has no realisable cell (every C exceeds n)"));
        }
        Ok(())
    }
}

/// Aggregate over one cell's trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub kind: ExperimentKind,
    pub n: usize,
    pub delta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub q: f64,
    pub seed_kind: SeedKind,
    pub chain_index: Option<usize>,
    pub solver: String,
    pub trials: u64,
    pub successes: u64,
    pub proportion: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub mean_ms: Option<f64>,
    pub not_found: u64,
    pub budget_exhausted: u64,
    /// Pipeline failures per stage tag.
    pub pipeline_failures: BTreeMap<String, u64>,
}

impl ExperimentRow {
    pub fn half_width(&self) -> f64 {
        (self.wilson_hi - self.wilson_lo) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}
