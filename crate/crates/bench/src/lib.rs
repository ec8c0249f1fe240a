// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks.

use bandslice::linalg::{band_reduce, random_hermitian, BandedHermitian, DenseHermitian};
use bandslice::partition::bounds_by_inertia;
use bandslice::C64;
use nalgebra::DMatrix;

pub fn dense(n: usize, seed: u64) -> DenseHermitian {
    random_hermitian(n, seed, false)
}

/// Band matrix of semibandwidth `bw` with the spectrum of a random dense one.
pub fn band(n: usize, bw: usize, seed: u64) -> BandedHermitian {
    band_reduce(&dense(n, seed), bw).expect("bw < n").0
}

/// Interval holding the `count` smallest eigenvalues of `d`.
pub fn lowest_window(d: &BandedHermitian, count: usize) -> (f64, f64) {
    bounds_by_inertia(d, count).expect("count <= n")
}

/// Deterministic dense block with entries in [-1, 1).
pub fn block(rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        let t = (i * 31 + j * 17) as f64;
        C64::new((t * 0.37).sin(), (t * 0.11).cos())
    })
}
