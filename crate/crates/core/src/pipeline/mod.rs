//! End-to-end absorption pipeline.
//!
//! Flexible vertex and colour sets are reserved first. A robustly matchable
//! template on the flexible sets plus buffers gets one absorber per edge,
//! chained by length-3 connectors. A long rainbow path from the DFS covers
//! most of what remains; the few leftover vertices and colours are threaded
//! through length-7 flexible connectors, and a robust matching of the
//! untouched flexible labels decides which absorbers absorb.

mod assemble;
mod flexible;
mod structure;

pub use assemble::{absorb_leftover, assemble_hamilton_cycle, Assembly, StageTimings};
pub use flexible::{build_flexible_sets, flexible_connect, FlexibleSets};
pub use structure::{build_absorbing_structure, build_absorbing_structure_on, structure_capacity, AbsorbingStructure, StructureCapacity};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorber::AbsorberSearchBudget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    FlexibleSets,
    AbsorbingStructure,
    DfsPath,
    LeftoverConnect,
    RobustMatch,
    FinalVerify,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::FlexibleSets => "flexible-sets",
            Stage::AbsorbingStructure => "absorbing-structure",
            Stage::DfsPath => "dfs-path",
            Stage::LeftoverConnect => "leftover-connect",
            Stage::RobustMatch => "robust-match",
            Stage::FinalVerify => "final-verify",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Deleted template labels for which no perfect matching existed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionWitness {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("pipeline failed at {stage}: {detail}")]
pub struct PipelineFailure {
    pub stage: Stage,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<DeletionWitness>,
}

impl PipelineFailure {
    pub fn new(stage: Stage, detail: impl Into<String>) -> Self {
        PipelineFailure { stage, detail: detail.into(), witness: None }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid pipeline input: {0}")]
    Input(String),
    #[error(transparent)]
    Failure(#[from] PipelineFailure),
}

impl PipelineError {
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Input(_) => None,
            PipelineError::Failure(f) => Some(f.stage),
        }
    }
}

fn input(msg: impl Into<String>) -> PipelineError {
    PipelineError::Input(msg.into())
}

/// Explicit knobs replacing the asymptotic constant hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineParams {
    /// Flexible fraction; the template scale is m = round(mu n).
    pub mu: f64,
    /// Template degree.
    pub d: usize,
    /// Vertices held back from the DFS; `None` means ceil(n / 50).
    pub k: Option<usize>,
    pub absorber: AbsorberSearchBudget,
    /// Shuffled retries for every connector search.
    pub connector_restarts: usize,
    /// Fresh absorber searches for a template edge whose connector failed.
    pub edge_retries: usize,
    /// Resamples of the independent-inclusion sets that overshoot 2m.
    pub flex_retries: usize,
    /// Sampled certification trials for templates too large to enumerate.
    pub certify_trials: u64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            mu: 0.01,
            d: 2,
            k: None,
            absorber: AbsorberSearchBudget::default(),
            connector_restarts: 2,
            edge_retries: 2,
            flex_retries: 100,
            certify_trials: 1000,
        }
    }
}

impl PipelineParams {
    pub fn m(&self, n: usize) -> usize {
        (self.mu * n as f64).round() as usize
    }

    pub fn k_for(&self, n: usize) -> usize {
        self.k.unwrap_or(n.div_ceil(50))
    }

    pub fn validate(&self, n: usize) -> Result<(), PipelineError> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(input(format!("mu = {} must lie in (0, 1]", self.mu)));
        }
        if self.d == 0 {
            return Err(input("template degree must be at least 1"));
        }
        if self.m(n) == 0 {
            return Err(input(format!("round(mu n) = 0 for mu = {}, n = {n}", self.mu)));
        }
        Ok(())
    }
}
