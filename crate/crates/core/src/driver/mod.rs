// SPDX-License-Identifier: Apache-2.0

//! End-to-end solves: band reduction, slicing, validation, redistribution
//! of the eigenvectors over the simulated grid and backtransform, for single
//! matrices and for sequences of related matrices.

mod pipeline;

use std::time::Duration;

use nalgebra::DMatrix;

pub use pipeline::{solve_interval, solve_one, solve_sequence, worker_count, WORKERS_ENV};

use crate::error::{Error, Result};
use crate::feast::{DEFAULT_MAX_ITER, DEFAULT_NODES, DEFAULT_TOL};
use crate::layout::TrafficReport;
use crate::linalg::{AccuracyReport, EigenPairs, DEFAULT_TAU};
use crate::partition::{BoundConfig, PartitionSource, MAX_RECOVERY_ROUNDS};
use crate::C64;

pub const DEFAULT_BANDWIDTH: usize = 64;
pub const DEFAULT_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of smallest eigenpairs wanted.
    pub nev: usize,
    /// Number of spectral slices.
    pub k: usize,
    /// Semibandwidth of the intermediate band matrix.
    pub n_bw: usize,
    /// Block size of the simulated block-cyclic layout.
    pub n_b: usize,
    /// Quadrature nodes per slice.
    pub n_e: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub grid_p: usize,
    pub grid_q: usize,
    /// Route the band matrix and eigenvectors through the simulated grid.
    pub use_grid: bool,
    /// Start each step of a sequence from the previous step's vectors.
    pub warm_start: bool,
    pub seed: u64,
    /// Perturbation size for synthesized sequences.
    pub tau: f64,
    pub bounds: BoundConfig,
    pub max_recovery_rounds: usize,
    /// Finish with one Rayleigh-Ritz step over all slice vectors together.
    pub polish: bool,
}

impl PipelineConfig {
    pub fn new(nev: usize, k: usize) -> Self {
        Self {
            nev,
            k,
            n_bw: DEFAULT_BANDWIDTH,
            n_b: DEFAULT_BLOCK,
            n_e: DEFAULT_NODES,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            grid_p: 2,
            grid_q: 2,
            use_grid: true,
            warm_start: true,
            seed: 0,
            tau: DEFAULT_TAU,
            bounds: BoundConfig::default(),
            max_recovery_rounds: MAX_RECOVERY_ROUNDS,
            polish: true,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.nev == 0 || self.nev > n {
            return bad(format!("nev {} must be in 1..={n}", self.nev));
        }
        if self.k == 0 {
            return bad("slice count must be positive".into());
        }
        if self.n_bw == 0 || self.n_b == 0 {
            return bad("bandwidth and block size must be positive".into());
        }
        if self.n_e < 2 || !self.n_e.is_multiple_of(2) {
            return Err(Error::InvalidNodeCount(self.n_e));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tolerance and iteration limit must be positive".into());
        }
        if self.grid_p == 0 || self.grid_q == 0 {
            return bad("grid dimensions must be positive".into());
        }
        self.bounds.validate()
    }
}

/// What a sequence step hands to the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct ScfState {
    /// Index of the step that produced this state, from 1.
    pub step: usize,
    /// Eigenvalues found, ascending.
    pub values: Vec<f64>,
    /// Matching eigenvectors of the band matrix, before backtransform.
    pub vectors: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceSummary {
    pub lower: f64,
    pub upper: f64,
    pub expected: usize,
    pub m0: usize,
    pub found: usize,
    pub iterations: usize,
    pub converged: bool,
    pub warm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub reduce: Duration,
    pub distribute: Duration,
    pub partition: Duration,
    pub solve: Duration,
    pub redistribute: Duration,
    pub backtransform: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub n: usize,
    pub bandwidth: usize,
    pub source: PartitionSource,
    /// Slices as first solved (iterations, counts).
    pub slices: Vec<SliceSummary>,
    pub recovery_rounds: usize,
    pub accuracy: AccuracyReport,
    pub band_traffic: Option<TrafficReport>,
    pub vector_traffic: Option<TrafficReport>,
    pub timings: StageTimings,
}

impl StepReport {
    pub fn mean_iterations(&self) -> f64 {
        if self.slices.is_empty() {
            return 0.0;
        }
        self.slices.iter().map(|s| s.iterations as f64).sum::<f64>() / self.slices.len() as f64
    }

    pub fn max_iterations(&self) -> usize {
        self.slices.iter().map(|s| s.iterations).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub pairs: EigenPairs,
    pub report: StepReport,
    pub state: ScfState,
}
