//! Instances, their generator and admissibility check, the pipeline driver
//! and the on-disk format.

mod check;
mod format;
mod generate;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_admissibility, AdmissibilityReport, Check};
pub use format::{from_json, to_json, Envelope, FormatError, Kind, FORMAT_VERSION};
pub use generate::generate_instance;
pub use report::{
    run_pipeline, run_pipeline_with, sample_families, verify_term, AtomCheck, EqualityCheck, HCheck, MainLemmaSummary,
    PipelineOptions, Report, StageOutcome, TermVerification,
};

use crate::algebra::{IndexSet, MTuple, Point, PointFn};
use crate::synth::CertifiedFn;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkbenchError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsatisfiable profile: {0}")]
    Unsatisfiable(String),
    #[error("generated instance failed its admissibility check: {0}")]
    NotAdmissible(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Every tuple lies below θ; decomposition has nothing to do.
    AllThrifty,
    /// Thrifty tuples plus planted wasteful groups at every block.
    Mixed,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::AllThrifty => "all-thrifty",
            Profile::Mixed => "mixed",
        })
    }
}

impl FromStr for Profile {
    type Err = WorkbenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-thrifty" => Ok(Profile::AllThrifty),
            "mixed" => Ok(Profile::Mixed),
            other => Err(WorkbenchError::InvalidParams(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub m: usize,
    pub horizon: u64,
    /// Defaults to `⌈N/2⌉`.
    pub theta: Option<u64>,
    pub seed: u64,
    pub profile: Profile,
    /// Arity of `f`; drawn from the seed when unset.
    pub f_arity: Option<usize>,
}

impl GenParams {
    pub fn new(m: usize, horizon: u64, seed: u64) -> Self {
        GenParams {
            m,
            horizon,
            theta: None,
            seed,
            profile: Profile::Mixed,
            f_arity: None,
        }
    }

    pub fn theta(&self) -> u64 {
        self.theta.unwrap_or(self.horizon.div_ceil(2))
    }
}

/// A wasteful group planted in `g`: one value, several representatives
/// below θ sharing a single reserved y-coordinate, and tuples above θ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedGroup {
    pub subset: IndexSet,
    pub key: MTuple,
    pub value: Point,
    pub reserved_y: u64,
    pub surplus: usize,
    pub above: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub groups: Vec<PlantedGroup>,
    /// `ℓ_n` for `n = 1, …, N-1`.
    pub witness_lines: Vec<u64>,
    /// Columns used on `ℓ_n`, in planting order.
    pub witness_rows: Vec<Vec<u64>>,
    /// Candidate indices that turn `f` into a unary witness.
    pub planted_indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub m: usize,
    pub horizon: u64,
    pub theta: u64,
    /// All coordinates lie below this value.
    pub ceiling: u64,
    pub seed: u64,
    pub profile: Profile,
    pub g: PointFn,
    pub f: PointFn,
    pub candidates: Vec<CertifiedFn>,
    pub admissibility: Admissibility,
}

pub fn default_ceiling(horizon: u64) -> u64 {
    horizon * horizon + horizon
}
