// SPDX-License-Identifier: Apache-2.0

use log::{debug, info};
use nalgebra::DMatrix;

use super::SpectrumPartition;
use crate::band_solver::count_below;
use crate::error::{Error, Result, SliceDeficit};
use crate::feast::{
    feast_slice, make_contour, subspace_size, SliceResult, SliceSolveConfig, DEFAULT_NODES,
};
use crate::linalg::{BandedHermitian, EigenPairs};
use crate::C64;

pub const MAX_RECOVERY_ROUNDS: usize = 2;

/// Solver settings for slices that have to be rerun.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub n_e: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            n_e: DEFAULT_NODES,
            tol: crate::feast::DEFAULT_TOL,
            max_iter: crate::feast::DEFAULT_MAX_ITER,
            seed: 0,
            max_rounds: MAX_RECOVERY_ROUNDS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    /// The `nev` smallest pairs found, ascending.
    pub pairs: EigenPairs,
    /// Final per-slice results, after any reruns.
    pub results: Vec<SliceResult>,
    pub rounds: usize,
    pub inertia_calls: usize,
    /// Slices that were rerun.
    pub rerun: Vec<usize>,
}

/// A slice whose result cannot be trusted without an exact count.
fn suspicious(r: &SliceResult) -> bool {
    !r.converged || r.m_found() >= r.m0
}

/// Checks that the slices found enough pairs and reruns the deficient ones
/// with a larger subspace.
///
/// Results are accepted as they are when they hold at least `nev` pairs and
/// no slice is unconverged or saturated. Otherwise exact slice counts come
/// from inertia at every boundary and each slice that found fewer pairs
/// than it holds is rerun, warm-started from its previous subspace, for at
/// most `cfg.max_rounds` rounds.
pub fn validate_counts(
    mut results: Vec<SliceResult>,
    nev: usize,
    d: &BandedHermitian,
    partition: &SpectrumPartition,
    cfg: &RecoveryConfig,
) -> Result<ValidationOutcome> {
    if results.len() != partition.k() {
        return Err(Error::DimensionMismatch {
            what: "slice results",
            expected: partition.k(),
            found: results.len(),
        });
    }
    let found: usize = results.iter().map(SliceResult::m_found).sum();
    if found >= nev && !results.iter().any(suspicious) {
        return Ok(ValidationOutcome {
            pairs: merge_pairs(&results, nev, d.n()),
            results,
            rounds: 0,
            inertia_calls: 0,
            rerun: Vec::new(),
        });
    }

    let below: Vec<usize> = partition
        .boundaries
        .iter()
        .map(|&b| count_below(d, b))
        .collect();
    let inertia_calls = below.len();
    let exact: Vec<usize> = below.windows(2).map(|w| w[1] - w[0]).collect();
    let deficient = |results: &[SliceResult]| -> Vec<usize> {
        (0..results.len())
            .filter(|&i| results[i].m_found() < exact[i])
            .collect()
    };

    let mut rerun = Vec::new();
    let mut rounds = 0;
    let mut todo = deficient(&results);
    while !todo.is_empty() && rounds < cfg.max_rounds {
        rounds += 1;
        info!("recovery round {rounds}: slices {todo:?}");
        for &i in &todo {
            let (lo, hi) = partition.slice(i);
            let m0 = subspace_size(exact[i]).max(results[i].m0 + 1).min(d.n());
            let prev = &results[i].subspace;
            let keep = prev.ncols().min(m0);
            let mut slice_cfg = SliceSolveConfig::for_count(exact[i], d.n());
            slice_cfg.m0 = m0;
            slice_cfg.tol = cfg.tol;
            slice_cfg.max_iter = cfg.max_iter;
            slice_cfg.seed = cfg.seed.wrapping_add((rounds * 7919 + i) as u64);
            if keep > 0 {
                slice_cfg.x0 = Some(prev.columns(0, keep).into_owned());
            }
            let quad = make_contour(lo, hi, cfg.n_e)?;
            let r = feast_slice(d, &quad, &slice_cfg)?;
            debug!(
                "slice {i}: exact {}, found {} -> {}",
                exact[i],
                results[i].m_found(),
                r.m_found()
            );
            results[i] = r;
            if !rerun.contains(&i) {
                rerun.push(i);
            }
        }
        todo = deficient(&results);
    }
    if !todo.is_empty() {
        return Err(Error::Unrecovered(
            todo.iter()
                .map(|&i| SliceDeficit {
                    slice: i,
                    lower: partition.boundaries[i],
                    upper: partition.boundaries[i + 1],
                    exact: exact[i],
                    found: results[i].m_found(),
                })
                .collect(),
        ));
    }
    Ok(ValidationOutcome {
        pairs: merge_pairs(&results, nev, d.n()),
        results,
        rounds,
        inertia_calls,
        rerun,
    })
}

/// Ascending union of the slice results, truncated to `nev` pairs.
///
/// A pair found by two neighbouring slices (an eigenvalue on their common
/// boundary) is kept once: equal values whose vectors overlap strongly are
/// collapsed.
pub fn merge_pairs(results: &[SliceResult], nev: usize, n: usize) -> EigenPairs {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (s, r) in results.iter().enumerate() {
        for (j, &v) in r.pairs.values.iter().enumerate() {
            all.push((v, s, j));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = all
        .iter()
        .map(|x| x.0.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut kept: Vec<(f64, usize, usize)> = Vec::with_capacity(nev.min(all.len()));
    for &(v, s, j) in &all {
        if kept.len() == nev {
            break;
        }
        let x = results[s].pairs.vectors.column(j);
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|k| v - k.0 <= 1e-10 * scale)
            .any(|&(_, ks, kj)| {
                ks != s && results[ks].pairs.vectors.column(kj).dotc(&x).norm() > 0.5
            });
        if !duplicate {
            kept.push((v, s, j));
        }
    }
    let mut vectors = DMatrix::<C64>::zeros(n, kept.len());
    for (c, &(_, s, j)) in kept.iter().enumerate() {
        vectors
            .column_mut(c)
            .copy_from(&results[s].pairs.vectors.column(j));
    }
    EigenPairs {
        values: kept.iter().map(|k| k.0).collect(),
        vectors,
    }
}
