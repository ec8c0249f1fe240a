// SPDX-License-Identifier: Apache-2.0

//! Contour-integral subspace iteration on one spectral slice.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::ContourQuadrature;
use crate::band_solver::{band_lu_factor, ShiftedBandFactor};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, reduced_hermitian_eig, BandedHermitian, EigenPairs};
use crate::C64;

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 20;
const SPURIOUS_GAIN: f64 = 0.5;

/// Subspace size for an expected count: `max(ceil(1.3 m), m + 10)`.
pub fn subspace_size(expected: usize) -> usize {
    let scaled = (13 * expected).div_ceil(10);
    scaled.max(expected + 10)
}

#[derive(Debug, Clone)]
pub struct SliceSolveConfig {
    /// Expected number of eigenvalues in the slice.
    pub expected: usize,
    /// Subspace size.
    pub m0: usize,
    /// Residual tolerance relative to `||D||_F`.
    pub tol: f64,
    pub max_iter: usize,
    /// Warm-start block; padded with random columns up to `m0`.
    pub x0: Option<DMatrix<C64>>,
    pub seed: u64,
}

impl SliceSolveConfig {
    /// Defaults for `expected` eigenvalues in a problem of dimension `n`; the
    /// subspace is capped at `n`.
    pub fn for_count(expected: usize, n: usize) -> Self {
        Self {
            expected,
            m0: subspace_size(expected).min(n),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            x0: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_start(mut self, x0: DMatrix<C64>) -> Self {
        self.x0 = Some(x0);
        self
    }
}

#[derive(Debug, Clone)]
pub struct SliceResult {
    pub lower: f64,
    pub upper: f64,
    /// Converged pairs with eigenvalue in `[lower, upper]`, ascending.
    pub pairs: EigenPairs,
    /// Relative residuals of `pairs`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Subspace size used.
    pub m0: usize,
    /// Ritz values of the final subspace outside the interval.
    pub outside: usize,
    /// In-interval Ritz values rejected as spurious.
    pub spurious: usize,
    /// Largest unconverged in-interval relative residual after each
    /// iteration.
    pub history: Vec<f64>,
    /// Final Ritz basis (all columns), usable as a restart block.
    pub subspace: DMatrix<C64>,
}

impl SliceResult {
    pub fn m_found(&self) -> usize {
        self.pairs.count()
    }
}

/// Factorizations of `z_j I - D` for every upper-half node.
pub struct FilterOperator<'a> {
    quad: &'a ContourQuadrature,
    factors: Vec<ShiftedBandFactor>,
    real: bool,
}

impl<'a> FilterOperator<'a> {
    pub fn new(d: &BandedHermitian, quad: &'a ContourQuadrature) -> Result<Self> {
        let factors = quad
            .nodes
            .par_iter()
            .map(|&z| band_lu_factor(d, z))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            quad,
            factors,
            real: d.is_real(),
        })
    }

    pub fn quadrature(&self) -> &ContourQuadrature {
        self.quad
    }

    /// `sum_j w_j (z_j I - D)^{-1} X` over the full contour.
    ///
    /// Lower-half nodes reuse the upper-half factors through the adjoint
    /// solve. For real `D` and real `X` the lower half is the complex
    /// conjugate of the upper half and is folded in without solving.
    pub fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let n = x.nrows();
        let m = x.ncols();
        let rows: Vec<C64> = x.transpose().as_slice().to_vec();
        let real = self.real && rows.iter().all(|z| z.im == 0.0);
        let parts: Vec<Vec<C64>> = self
            .factors
            .par_iter()
            .zip(&self.quad.weights)
            .map(|(f, &w)| {
                let mut y = rows.clone();
                f.solve_rows(&mut y, m);
                if real {
                    for v in &mut y {
                        *v = C64::new(2.0 * (w * *v).re, 0.0);
                    }
                } else {
                    let mut ya = rows.clone();
                    f.solve_adjoint_rows(&mut ya, m);
                    let wc = w.conj();
                    for (v, va) in y.iter_mut().zip(&ya) {
                        *v = w * *v + wc * va;
                    }
                }
                y
            })
            .collect();
        let mut acc = vec![C64::new(0.0, 0.0); n * m];
        // fixed summation order keeps results independent of scheduling
        for p in &parts {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        DMatrix::from_row_slice(n, m, &acc)
    }
}

/// Seeded random block. Real entries when `real` is set.
pub fn random_block(n: usize, m: usize, seed: u64, real: bool) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, m, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = if real {
            0.0
        } else {
            StandardNormal.sample(&mut rng)
        };
        C64::new(re, im)
    })
}

/// Computes the eigenpairs of `d` in the quadrature's interval.
pub fn feast_slice(
    d: &BandedHermitian,
    quad: &ContourQuadrature,
    cfg: &SliceSolveConfig,
) -> Result<SliceResult> {
    let n = d.n();
    if cfg.m0 == 0 || cfg.m0 > n {
        return Err(Error::InvalidArgument(format!(
            "subspace size {} must be in 1..={n}",
            cfg.m0
        )));
    }
    let real = d.is_real();
    let mut x = match &cfg.x0 {
        Some(x0) => {
            if x0.nrows() != n {
                return Err(Error::DimensionMismatch {
                    what: "warm-start rows",
                    expected: n,
                    found: x0.nrows(),
                });
            }
            if x0.ncols() > cfg.m0 {
                return Err(Error::DimensionMismatch {
                    what: "warm-start columns",
                    expected: cfg.m0,
                    found: x0.ncols(),
                });
            }
            let pad = cfg.m0 - x0.ncols();
            let real_start = real && x0.iter().all(|z| z.im == 0.0);
            let mut x = DMatrix::zeros(n, cfg.m0);
            x.columns_mut(0, x0.ncols()).copy_from(x0);
            if pad > 0 {
                x.columns_mut(x0.ncols(), pad)
                    .copy_from(&random_block(n, pad, cfg.seed, real_start));
            }
            x
        }
        None => random_block(n, cfg.m0, cfg.seed, real),
    };

    let filter = FilterOperator::new(d, quad)?;
    let norm = d.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut ritz = EigenPairs::empty(n);
    let mut residuals = Vec::new();

    let mut spurious = 0;
    let mut y = filter.apply(&x);
    while iterations < cfg.max_iter {
        iterations += 1;
        let q = orthonormalize(&y);
        let dq = d.matmul(&q);
        let aq = q.adjoint() * &dq;
        let small = reduced_hermitian_eig(&aq);
        x = &q * &small.vectors;
        let dx = dq * &small.vectors;
        residuals = small
            .values
            .iter()
            .enumerate()
            .map(|(i, &l)| (dx.column(i) - x.column(i) * C64::new(l, 0.0)).norm() / norm)
            .collect();
        ritz = EigenPairs {
            values: small.values,
            vectors: x.clone(),
        };
        let pending: Vec<usize> = (0..ritz.count())
            .filter(|&i| quad.contains(ritz.values[i]) && residuals[i] > cfg.tol)
            .collect();
        history.push(pending.iter().map(|&i| residuals[i]).fold(0.0, f64::max));
        if pending.is_empty() {
            converged = true;
            break;
        }
        if iterations == cfg.max_iter {
            break;
        }
        y = filter.apply(&x);
        // A Ritz vector made of eigenvectors outside the interval can have its
        // Ritz value inside it. The filter damps such a vector below 1/2,
        // while eigenvectors inside the interval pass with gain above 1/2.
        if pending.iter().all(|&i| y.column(i).norm() < SPURIOUS_GAIN) {
            spurious = pending.len();
            converged = true;
            break;
        }
    }

    let keep: Vec<usize> = (0..ritz.count())
        .filter(|&i| quad.contains(ritz.values[i]) && residuals[i] <= cfg.tol)
        .collect();
    let outside = ritz.values.iter().filter(|l| !quad.contains(**l)).count();
    Ok(SliceResult {
        lower: quad.lower,
        upper: quad.upper,
        pairs: ritz.select(&keep),
        residuals: keep.iter().map(|&i| residuals[i]).collect(),
        iterations,
        converged,
        m0: cfg.m0,
        outside,
        spurious,
        history,
        subspace: ritz.vectors,
    })
}
