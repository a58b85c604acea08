//! End-to-end experiments: generate, check conditions, solve, certify, score.
//!
//! All randomness of a trial flows from its 64-bit seed through
//! [`derive_seed`](crate::rng::derive_seed) with the named streams in
//! [`streams`](crate::rng::streams), so a trial is reproduced from
//! `(spec, seed)` alone and sweeps do not depend on scheduling. Trials run in
//! parallel; work inside a trial runs sequentially.

pub mod record;
mod sweep;
mod trial;

pub use sweep::{run_sweep, trend_check, CellSummary, SweepGrid, SweepResult, TrendCheck};
pub use trial::{generate_instance, run_trial, verify_pipeline, PipelineReport, TrialRecord};

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::{MaskKind, ModelKind};
use crate::par::Execution;
use crate::solver::SolverConfig;
use crate::theorem_lambda;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    /// `1 / sqrt(n log n)`.
    Theorem,
    Explicit(f64),
}

impl LambdaMode {
    pub fn value(&self, n: usize) -> f64 {
        match *self {
            LambdaMode::Theorem => theorem_lambda(n),
            LambdaMode::Explicit(v) => v,
        }
    }
}

/// Observation pattern of an experiment. Bernoulli masks are redrawn per
/// trial from the trial seed.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskSpec {
    Full,
    Decimation(usize),
    Block(usize),
    Bernoulli(f64),
    File(PathBuf),
}

impl MaskSpec {
    /// The generator input, with `mask_seed` used by Bernoulli patterns.
    pub fn kind(&self, mask_seed: u64) -> MaskKind {
        match self {
            MaskSpec::Full => MaskKind::Full,
            MaskSpec::Decimation(m) => MaskKind::Decimation(*m),
            MaskSpec::Block(b) => MaskKind::Block(*b),
            MaskSpec::Bernoulli(rate) => MaskKind::Bernoulli {
                rate: *rate,
                seed: mask_seed,
            },
            MaskSpec::File(p) => MaskKind::FromFile(p.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            MaskSpec::Full => "full".into(),
            MaskSpec::Decimation(m) => format!("decimation:{m}"),
            MaskSpec::Block(b) => format!("block:{b}"),
            MaskSpec::Bernoulli(rate) => format!("bernoulli:{rate}"),
            MaskSpec::File(p) => format!("file:{}", p.display()),
        }
    }

    /// Nominal sampling rate, if the pattern has one.
    pub fn rate(&self) -> Option<f64> {
        match self {
            MaskSpec::Bernoulli(rate) => Some(*rate),
            MaskSpec::Full => Some(1.0),
            _ => None,
        }
    }
}

/// Which stages a trial runs beyond generation and solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    pub conditions: bool,
    pub certificate: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Self {
            conditions: true,
            certificate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub rank: usize,
    pub rho: f64,
    pub mask: MaskSpec,
    pub model_kind: ModelKind,
    /// Corruption magnitudes are uniform on `[scale / 2, scale]`.
    pub magnitude_scale: f64,
    pub lambda_mode: LambdaMode,
    pub seeds: Vec<u64>,
    /// `lambda` is replaced by `lambda_mode` at run time.
    pub solver: SolverConfig,
    pub success_tol: f64,
    pub stages: Stages,
    /// How trials are distributed; each trial itself runs sequentially.
    pub exec: Execution,
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(n: usize, rank: usize, rho: f64, mask: MaskSpec, seeds: Vec<u64>) -> Self {
        Self {
            n,
            rank,
            rho,
            mask,
            model_kind: ModelKind::default(),
            magnitude_scale: 1.0,
            lambda_mode: LambdaMode::Theorem,
            seeds,
            solver: SolverConfig::for_size(n.max(2)),
            success_tol: 1e-4,
            stages: Stages::default(),
            exec: Execution::Parallel,
            output: None,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_mode.value(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::param("at least one seed is required"));
        }
        if self.n < 2 {
            return Err(Error::param(format!("n = {} must be at least 2", self.n)));
        }
        if self.rank == 0 || self.rank > self.n {
            return Err(Error::InvalidRank {
                n: self.n,
                rank: self.rank,
            });
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::param(format!("rho {} outside [0, 1)", self.rho)));
        }
        if !(self.success_tol > 0.0) {
            return Err(Error::param("success tolerance must be positive"));
        }
        if !(self.magnitude_scale > 0.0) {
            return Err(Error::param("magnitude scale must be positive"));
        }
        self.solver.with_lambda(self.lambda()).validate()
    }
}

/// Worker count recorded with results.
pub(crate) fn threads_for(exec: Execution) -> usize {
    match exec {
        Execution::Sequential => 1,
        Execution::Parallel => crate::par::current_threads(),
    }
}
