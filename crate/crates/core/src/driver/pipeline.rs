// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use log::{debug, info, warn};
use rayon::prelude::*;

use super::{PipelineConfig, ScfState, SliceSummary, Solution, StageTimings, StepReport};
use crate::band_solver::count_below;
use crate::error::{Error, Result};
use crate::feast::{feast_slice, make_contour, subspace_size, SliceResult, SliceSolveConfig};
use crate::layout::{
    gather_band_to_compact, redistribute_1d_to_2d, BlockCyclicLayout, Execution, Irregular1DLayout,
    ProcessGrid,
};
use crate::linalg::{
    accuracy_report, backtransform, band_reduce, orthonormalize, reduced_hermitian_eig,
    BandedHermitian, DenseHermitian, EigenPairs,
};
use crate::partition::{
    bounds_by_inertia, compute_bounds, inertia_partition, merge_pairs, validate_counts,
    RecoveryConfig, SpectrumPartition,
};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "BANDSLICE_WORKERS";

/// Worker count requested through [`WORKERS_ENV`], if any.
pub fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
}

fn with_workers<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match worker_count().and_then(|w| rayon::ThreadPoolBuilder::new().num_threads(w).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

enum Target {
    Smallest(usize),
    Interval(f64, f64),
}

/// The `cfg.nev` smallest eigenpairs of `a`.
///
/// With a previous `state` and `cfg.warm_start`, its eigenvalues drive the
/// partition and its vectors seed the slices; otherwise the partition comes
/// from inertia bisection and the slices start from random blocks.
pub fn solve_one(
    a: &DenseHermitian,
    cfg: &PipelineConfig,
    state: Option<&ScfState>,
) -> Result<Solution> {
    cfg.validate(a.n())?;
    with_workers(|| run(a, cfg, state, Target::Smallest(cfg.nev)))
}

/// Eigenpairs of `a` with eigenvalues in `(lower, upper]`.
///
/// Experimental: bounds are taken as given and only the slice counts are
/// checked, so eigenvalues sitting on `lower` or `upper` may be missed or
/// reported.
pub fn solve_interval(
    a: &DenseHermitian,
    lower: f64,
    upper: f64,
    cfg: &PipelineConfig,
    state: Option<&ScfState>,
) -> Result<Solution> {
    if !(lower < upper) {
        return Err(Error::InvalidInterval { lower, upper });
    }
    let mut cfg = cfg.clone();
    cfg.nev = a.n();
    cfg.validate(a.n())?;
    with_workers(|| run(a, &cfg, state, Target::Interval(lower, upper)))
}

/// Solves each matrix in turn, warm-starting step `l` from step `l - 1`
/// when `cfg.warm_start` is set.
pub fn solve_sequence(matrices: &[DenseHermitian], cfg: &PipelineConfig) -> Result<Vec<Solution>> {
    let mut out: Vec<Solution> = Vec::with_capacity(matrices.len());
    for (step, a) in matrices.iter().enumerate() {
        let prev = if cfg.warm_start {
            out.last().map(|s| &s.state)
        } else {
            None
        };
        let mut sol = solve_one(a, cfg, prev)?;
        sol.state.step = step + 1;
        sol.report.step = step + 1;
        info!(
            "step {}: {} pairs, mean iterations {:.2}",
            step + 1,
            sol.pairs.count(),
            sol.report.mean_iterations()
        );
        out.push(sol);
    }
    Ok(out)
}

fn run(
    a: &DenseHermitian,
    cfg: &PipelineConfig,
    state: Option<&ScfState>,
    target: Target,
) -> Result<Solution> {
    let n = a.n();
    let mut timings = StageTimings::default();
    let grid = ProcessGrid::new(cfg.grid_p, cfg.grid_q)?;
    if let Some(s) = state {
        if s.vectors.nrows() != n || s.vectors.ncols() != s.values.len() {
            return Err(Error::DimensionMismatch {
                what: "carried eigenvectors",
                expected: n,
                found: s.vectors.nrows(),
            });
        }
    }

    let clock = Instant::now();
    let (d, transform) = if n == 1 {
        let d = BandedHermitian::from_diagonal(&[a.get(0, 0).re]);
        (d, None)
    } else {
        let bw = cfg.n_bw.min(n - 1);
        let (d, t) = band_reduce(a, bw).map_err(|e| e.in_stage("band reduction"))?;
        (d, Some(t))
    };
    timings.reduce = clock.elapsed();

    let clock = Instant::now();
    let (d, band_traffic) = if cfg.use_grid && n > 1 {
        let dist = BlockCyclicLayout::distribute(&d.to_dense(), cfg.n_b, cfg.n_b, grid)?;
        let (mut bands, traffic) =
            gather_band_to_compact(&dist, d.bandwidth(), Execution::Sequential)
                .map_err(|e| e.in_stage("band gather"))?;
        (bands.swap_remove(0), Some(traffic))
    } else {
        (d, None)
    };
    timings.distribute = clock.elapsed();

    let clock = Instant::now();
    let warm = state.filter(|_| cfg.warm_start);
    let (partition, nev) = match target {
        Target::Smallest(nev) => (partition_smallest(&d, nev, cfg, warm)?, nev),
        Target::Interval(lo, hi) => {
            let nev = count_below(&d, hi) - count_below(&d, lo);
            (partition_interval(&d, lo, hi, nev, cfg, warm)?, nev)
        }
    };
    timings.partition = clock.elapsed();
    debug!(
        "partition {:?} counts {:?}",
        partition.boundaries, partition.counts
    );

    let clock = Instant::now();
    let results = solve_slices(&d, &partition, cfg, warm)?;
    let slices: Vec<SliceSummary> = results
        .iter()
        .enumerate()
        .map(|(i, r)| SliceSummary {
            lower: r.lower,
            upper: r.upper,
            expected: partition.counts[i],
            m0: r.m0,
            found: r.m_found(),
            iterations: r.iterations,
            converged: r.converged,
            warm: warm.is_some(),
        })
        .collect();
    let recovery = RecoveryConfig {
        n_e: cfg.n_e,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        seed: cfg.seed,
        max_rounds: cfg.max_recovery_rounds,
    };
    let outcome = if nev == 0 {
        None
    } else {
        Some(
            validate_counts(results, nev, &d, &partition, &recovery)
                .map_err(|e| e.in_stage("slice validation"))?,
        )
    };
    timings.solve = clock.elapsed();

    let (all_found, recovery_rounds) = match outcome {
        Some(o) => (merge_pairs(&o.results, usize::MAX, n), o.rounds),
        None => (EigenPairs::empty(n), 0),
    };
    let all_found = if cfg.polish {
        polish(&d, all_found)
    } else {
        all_found
    };
    let keep: Vec<usize> = (0..nev.min(all_found.count())).collect();
    let banded = all_found.select(&keep);
    timings.solve = clock.elapsed();

    let clock = Instant::now();
    let (gathered, vector_traffic) = if cfg.use_grid && banded.count() > 0 {
        let counts = rank_counts(&partition, &banded.values, grid.size());
        let x = Irregular1DLayout::from_matrix(&banded.vectors, &counts)?;
        let (layout, traffic) = redistribute_1d_to_2d(&x, grid, cfg.n_b, Execution::Sequential)
            .map_err(|e| e.in_stage("eigenvector redistribution"))?;
        let vectors = layout.gather();
        (
            EigenPairs {
                values: banded.values.clone(),
                vectors,
            },
            Some(traffic),
        )
    } else {
        (banded, None)
    };
    timings.redistribute = clock.elapsed();

    let clock = Instant::now();
    let pairs = match &transform {
        Some(t) => backtransform(t, &gathered).map_err(|e| e.in_stage("backtransform"))?,
        None => gathered,
    };
    timings.backtransform = clock.elapsed();

    let accuracy = accuracy_report(a, &pairs);
    let report = StepReport {
        step: state.map_or(1, |s| s.step + 1),
        n,
        bandwidth: d.bandwidth(),
        source: partition.source,
        slices,
        recovery_rounds,
        accuracy,
        band_traffic,
        vector_traffic,
        timings,
    };
    let state = ScfState {
        step: report.step,
        values: all_found.values,
        vectors: all_found.vectors,
    };
    Ok(Solution {
        pairs,
        report,
        state,
    })
}

fn partition_smallest(
    d: &BandedHermitian,
    nev: usize,
    cfg: &PipelineConfig,
    warm: Option<&ScfState>,
) -> Result<SpectrumPartition> {
    if let Some(s) = warm.filter(|s| s.values.len() >= nev) {
        match compute_bounds(&s.values, nev, &cfg.bounds, d) {
            Ok((b0, bk)) => return SpectrumPartition::from_priors(&s.values, b0, bk, cfg.k),
            Err(e @ Error::BoundsExhausted { .. }) => warn!("{e}; partitioning by inertia instead"),
            Err(e) => return Err(e.in_stage("bound selection")),
        }
    }
    let (b0, bk) = bounds_by_inertia(d, nev).map_err(|e| e.in_stage("bound selection"))?;
    inertia_partition(d, b0, bk, nev, cfg.k).map_err(|e| e.in_stage("partition"))
}

fn partition_interval(
    d: &BandedHermitian,
    lo: f64,
    hi: f64,
    nev: usize,
    cfg: &PipelineConfig,
    warm: Option<&ScfState>,
) -> Result<SpectrumPartition> {
    if let Some(s) = warm {
        if s.values.iter().any(|&v| v > lo && v <= hi) {
            return SpectrumPartition::from_priors(&s.values, lo, hi, cfg.k);
        }
    }
    inertia_partition(d, lo, hi, nev.max(1), cfg.k).map_err(|e| e.in_stage("partition"))
}

fn solve_slices(
    d: &BandedHermitian,
    partition: &SpectrumPartition,
    cfg: &PipelineConfig,
    warm: Option<&ScfState>,
) -> Result<Vec<SliceResult>> {
    let n = d.n();
    (0..partition.k())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = partition.slice(i);
            let quad = make_contour(lo, hi, cfg.n_e)?;
            let mut sc = SliceSolveConfig::for_count(partition.counts[i], n);
            sc.m0 = subspace_size(partition.counts[i]).min(n);
            sc.tol = cfg.tol;
            sc.max_iter = cfg.max_iter;
            sc.seed = cfg
                .seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(i as u64);
            if let Some(s) = warm {
                let cols: Vec<usize> = (0..s.values.len())
                    .filter(|&j| s.values[j] >= lo && s.values[j] <= hi)
                    .take(sc.m0)
                    .collect();
                if !cols.is_empty() {
                    sc.x0 = Some(s.vectors.select_columns(&cols));
                }
            }
            feast_slice(d, &quad, &sc).map_err(|e| e.in_stage("slice solve"))
        })
        .collect()
}

/// Rayleigh-Ritz over the union of all slice vectors.
///
/// Slices converge independently, so vectors from neighbouring slices are
/// orthogonal only up to about residual over gap. One projection onto their
/// joint span restores orthogonality to rounding level without making any
/// residual worse.
fn polish(d: &BandedHermitian, pairs: EigenPairs) -> EigenPairs {
    if pairs.count() == 0 {
        return pairs;
    }
    let q = orthonormalize(&pairs.vectors);
    if q.ncols() < pairs.count() {
        warn!("slice vectors are linearly dependent; skipping the joint projection");
        return pairs;
    }
    let small = reduced_hermitian_eig(&(q.adjoint() * d.matmul(&q)));
    EigenPairs {
        values: small.values,
        vectors: q * small.vectors,
    }
}

/// Columns per grid rank when slice `i` lives on rank `i * ranks / k`.
fn rank_counts(partition: &SpectrumPartition, values: &[f64], ranks: usize) -> Vec<usize> {
    let k = partition.k();
    let mut counts = vec![0; ranks];
    for &v in values {
        let slice = partition.boundaries[1..k]
            .iter()
            .take_while(|&&b| v > b)
            .count();
        counts[slice * ranks / k] += 1;
    }
    counts
}
