// SPDX-License-Identifier: Apache-2.0

//! Dense and banded Hermitian matrices, band reduction and backtransform,
//! accuracy metrics, matrix ingestion and perturbation.

mod band;
mod dense;
pub mod io;
mod perturb;
mod reduce;
mod small;

use nalgebra::DMatrix;

pub use band::BandedHermitian;
pub use dense::DenseHermitian;
pub use perturb::{perturb_sequence, random_hermitian, DEFAULT_TAU};
pub use reduce::{backtransform, band_reduce, BandReductionTransform, HouseholderPanel};
pub use small::{orthonormalize, reduced_hermitian_eig};

use crate::C64;

/// Eigenvalues in ascending order with their eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl EigenPairs {
    pub fn empty(n: usize) -> Self {
        Self {
            values: Vec::new(),
            vectors: DMatrix::zeros(n, 0),
        }
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    /// Keeps the pairs at the given column indices, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            vectors: self.vectors.select_columns(idx),
        }
    }
}

/// Accuracy of computed eigenpairs against a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// `||X^H X - I||_max / n`.
    pub orth: f64,
    /// Largest `||A x - lambda x||_2 / ||A||_F`.
    pub max_residual: f64,
    /// Largest unnormalized `||A x - lambda x||_2`.
    pub max_raw_residual: f64,
    pub per_pair_residuals: Vec<f64>,
}

/// Orthogonality metric `||X^H X - I||_max / n` where `n` is the row count.
pub fn orthogonality(x: &DMatrix<C64>) -> f64 {
    let n = x.nrows();
    if n == 0 {
        return 0.0;
    }
    let g = x.adjoint() * x;
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let e = if i == j { g[(i, j)] - 1.0 } else { g[(i, j)] };
            worst = worst.max(e.norm());
        }
    }
    worst / n as f64
}

/// Unnormalized residual norms `||A x_i - lambda_i x_i||_2`.
pub fn raw_residuals(a: &DMatrix<C64>, pairs: &EigenPairs) -> Vec<f64> {
    let ax = a * &pairs.vectors;
    pairs
        .values
        .iter()
        .enumerate()
        .map(|(i, &l)| (ax.column(i) - pairs.vectors.column(i) * C64::new(l, 0.0)).norm())
        .collect()
}

pub fn accuracy_report(a: &DenseHermitian, pairs: &EigenPairs) -> AccuracyReport {
    let raw = raw_residuals(a.data(), pairs);
    let fro = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let per_pair: Vec<f64> = raw.iter().map(|r| r / fro).collect();
    AccuracyReport {
        orth: orthogonality(&pairs.vectors),
        max_residual: per_pair.iter().copied().fold(0.0, f64::max),
        max_raw_residual: raw.iter().copied().fold(0.0, f64::max),
        per_pair_residuals: per_pair,
    }
}
