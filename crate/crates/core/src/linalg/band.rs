// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Hermitian band matrix in LAPACK-style lower compact storage.
///
/// Column `j` of the storage holds `D[j + d][j]` at offset `d` for
/// `0 <= d <= bw`. Entries outside the band have no storage. The diagonal is
/// kept real.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian {
    n: usize,
    bw: usize,
    ab: Vec<C64>,
}

impl BandedHermitian {
    pub fn zeros(n: usize, bw: usize) -> Self {
        assert!(n >= 1 && bw >= 1, "band matrix needs n >= 1 and bw >= 1");
        Self {
            n,
            bw,
            ab: vec![C64::new(0.0, 0.0); n * (bw + 1)],
        }
    }

    /// Takes the lower band of a dense Hermitian matrix. Fails if anything
    /// outside the band is nonzero or the matrix is not Hermitian.
    pub fn from_dense(a: &DMatrix<C64>, bw: usize) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        if bw == 0 {
            return Err(Error::InvalidBandwidth { bw, n });
        }
        let mut d = Self::zeros(n, bw);
        for j in 0..n {
            for i in j..n {
                let v = a[(i, j)];
                if v != a[(j, i)].conj() {
                    return Err(Error::NotHermitian { row: i, col: j });
                }
                if i - j > bw {
                    if v != C64::new(0.0, 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "entry ({i}, {j}) lies outside semibandwidth {bw}"
                        )));
                    }
                } else {
                    d.set(i, j, v);
                }
            }
        }
        Ok(d)
    }

    /// Diagonal band matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut d = Self::zeros(diag.len(), 1);
        for (j, &x) in diag.iter().enumerate() {
            d.set(j, j, C64::new(x, 0.0));
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub(crate) fn ldab(&self) -> usize {
        self.bw + 1
    }

    /// Raw lower compact storage, column-major with leading dimension `bw + 1`.
    pub fn storage(&self) -> &[C64] {
        &self.ab
    }

    pub fn is_real(&self) -> bool {
        self.ab.iter().all(|z| z.im == 0.0)
    }

    /// Entry `D[i][j]`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i >= j {
            if i - j > self.bw {
                C64::new(0.0, 0.0)
            } else {
                self.ab[(i - j) + j * self.ldab()]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    /// Sets the lower entry `D[i][j]` (`i >= j`, inside the band); the upper
    /// mirror is implied. Diagonal entries drop their imaginary part.
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(
            i >= j && i - j <= self.bw && i < self.n,
            "({i}, {j}) outside band"
        );
        let v = if i == j { C64::new(v.re, 0.0) } else { v };
        let ld = self.ldab();
        self.ab[(i - j) + j * ld] = v;
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let ld = self.ldab();
        let mut s = 0.0;
        for j in 0..self.n {
            for d in 0..=self.bw.min(self.n - 1 - j) {
                let w = if d == 0 { 1.0 } else { 2.0 };
                s += w * self.ab[d + j * ld].norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let c = self.get(i, i).re;
            let first = i.saturating_sub(self.bw);
            let last = (i + self.bw).min(self.n - 1);
            let r: f64 = (first..=last)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).norm())
                .sum();
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        (lo, hi)
    }

    /// `D * X` for a dense block `X` with `n` rows.
    pub fn matmul(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(x.nrows(), self.n, "band matmul dimension mismatch");
        let n = self.n;
        let ld = self.ldab();
        let mut y = DMatrix::<C64>::zeros(n, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut yc = y.column_mut(c);
            for j in 0..n {
                let xj = xc[j];
                yc[j] += self.ab[j * ld] * xj;
                for d in 1..=self.bw.min(n - 1 - j) {
                    let l = self.ab[d + j * ld];
                    // lower entry (j+d, j) and its mirror (j, j+d)
                    yc[j + d] += l * xj;
                    yc[j] += l.conj() * xc[j + d];
                }
            }
        }
        y
    }
}
