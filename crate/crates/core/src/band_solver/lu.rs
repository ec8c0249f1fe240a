// SPDX-License-Identifier: Apache-2.0

//! Partial-pivoting LU of `zI - D` in general band storage.
//!
//! Storage follows `xGBTRF`: leading dimension `2*kl + ku + 1`, entry `(i, j)`
//! at row `kl + ku + i - j` of column `j`. The extra `kl` rows absorb the
//! fill-in of row interchanges, so `U` has `kl + ku` superdiagonals.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::BandedHermitian;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// LU factorization of `zI - D` for a Hermitian band matrix `D`.
#[derive(Debug, Clone)]
pub struct ShiftedBandFactor {
    n: usize,
    kl: usize,
    shift: C64,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl ShiftedBandFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> C64 {
        self.shift
    }

    #[inline]
    fn ld(&self) -> usize {
        3 * self.kl + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> C64 {
        self.ab[2 * self.kl + i - j + j * self.ld()]
    }

    /// Solves `(zI - D) X = B` in place. `b` is row-major: row `i` is
    /// `b[i*m..(i+1)*m]`.
    pub(crate) fn solve_rows(&self, b: &mut [C64], m: usize) {
        let n = self.n;
        let kl = self.kl;
        let ku = kl;
        // L: row interchanges and unit lower eliminations
        for j in 0..n.saturating_sub(1) {
            let lm = kl.min(n - 1 - j);
            let p = self.ipiv[j];
            if p != j {
                swap_rows(b, m, j, p);
            }
            let (head, tail) = b.split_at_mut((j + 1) * m);
            let bj = &head[j * m..];
            for r in 1..=lm {
                let l = self.at(j + r, j);
                if l == ZERO {
                    continue;
                }
                axpy(-l, bj, &mut tail[(r - 1) * m..r * m]);
            }
        }
        // U: back substitution, kl + ku superdiagonals
        for j in (0..n).rev() {
            let inv = C64::new(1.0, 0.0) / self.at(j, j);
            let (head, tail) = b.split_at_mut(j * m);
            let bj = &mut tail[..m];
            for x in bj.iter_mut() {
                *x *= inv;
            }
            let first = j.saturating_sub(kl + ku);
            for i in first..j {
                let u = self.at(i, j);
                if u == ZERO {
                    continue;
                }
                axpy(-u, bj, &mut head[i * m..(i + 1) * m]);
            }
        }
    }

    /// Solves `(zI - D)^H X = B` in place, i.e. the system with shift
    /// `conj(z)` for Hermitian `D`, reusing this factorization.
    pub(crate) fn solve_adjoint_rows(&self, b: &mut [C64], m: usize) {
        let n = self.n;
        let kl = self.kl;
        let ku = kl;
        // U^H y = b, forward
        for j in 0..n {
            let first = j.saturating_sub(kl + ku);
            let (head, tail) = b.split_at_mut(j * m);
            let bj = &mut tail[..m];
            for i in first..j {
                let u = self.at(i, j).conj();
                if u == ZERO {
                    continue;
                }
                axpy(-u, &head[i * m..(i + 1) * m], bj);
            }
            let inv = C64::new(1.0, 0.0) / self.at(j, j).conj();
            for x in bj.iter_mut() {
                *x *= inv;
            }
        }
        // L^H with interchanges applied in reverse
        for j in (0..n.saturating_sub(1)).rev() {
            let lm = kl.min(n - 1 - j);
            let (head, tail) = b.split_at_mut((j + 1) * m);
            let bj = &mut head[j * m..];
            for r in 1..=lm {
                let l = self.at(j + r, j).conj();
                if l == ZERO {
                    continue;
                }
                axpy(-l, &tail[(r - 1) * m..r * m], bj);
            }
            let p = self.ipiv[j];
            if p != j {
                swap_rows(b, m, j, p);
            }
        }
    }
}

#[inline]
fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn swap_rows(b: &mut [C64], m: usize, i: usize, j: usize) {
    let (lo, hi) = (i.min(j), i.max(j));
    let (head, tail) = b.split_at_mut(hi * m);
    head[lo * m..(lo + 1) * m].swap_with_slice(&mut tail[..m]);
}

/// Factors `zI - D` with partial pivoting.
pub fn band_lu_factor(d: &BandedHermitian, z: C64) -> Result<ShiftedBandFactor> {
    let n = d.n();
    let kl = d.bandwidth().min(n.saturating_sub(1));
    let ku = kl;
    let ld = 2 * kl + ku + 1;
    let kv = kl + ku;
    let mut ab = vec![ZERO; ld * n];
    for j in 0..n {
        let lo = j.saturating_sub(ku);
        let hi = (j + kl).min(n - 1);
        for i in lo..=hi {
            let v = if i == j {
                z - d.get(i, j)
            } else {
                -d.get(i, j)
            };
            ab[kv + i - j + j * ld] = v;
        }
    }

    let mut ipiv = vec![0usize; n];
    // last column touched by interchanges so far
    let mut ju = 0usize;
    for j in 0..n {
        let km = kl.min(n - 1 - j);
        let col = j * ld + kv;
        let mut jp = 0;
        let mut best = cabs1(ab[col]);
        for r in 1..=km {
            let v = cabs1(ab[col + r]);
            if v > best {
                best = v;
                jp = r;
            }
        }
        ipiv[j] = j + jp;
        if best == 0.0 {
            return Err(Error::SingularShift {
                column: j,
                shift: z,
            });
        }
        ju = ju.max((j + ku + jp).min(n - 1));
        if jp != 0 {
            for c in j..=ju {
                let a = kv + j - c + c * ld;
                let b = kv + j + jp - c + c * ld;
                ab.swap(a, b);
            }
        }
        if km > 0 {
            let inv = C64::new(1.0, 0.0) / ab[col];
            for r in 1..=km {
                ab[col + r] *= inv;
            }
            for c in j + 1..=ju {
                let ujc = ab[kv + j - c + c * ld];
                if ujc == ZERO {
                    continue;
                }
                let base = kv + j - c + c * ld;
                for r in 1..=km {
                    let l = ab[col + r];
                    ab[base + r] -= l * ujc;
                }
            }
        }
    }
    Ok(ShiftedBandFactor {
        n,
        kl,
        shift: z,
        ab,
        ipiv,
    })
}

/// `(zI - D)^{-1} B` for a dense block `B`.
pub fn band_solve(f: &ShiftedBandFactor, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if b.nrows() != f.n {
        return Err(Error::DimensionMismatch {
            what: "band solve right-hand side rows",
            expected: f.n,
            found: b.nrows(),
        });
    }
    let m = b.ncols();
    let mut rows = b.transpose().as_slice().to_vec();
    f.solve_rows(&mut rows, m);
    Ok(DMatrix::from_row_slice(f.n, m, &rows))
}

/// `(zI - D)^{-H} B`, the solve with shift `conj(z)`.
pub fn band_solve_adjoint(f: &ShiftedBandFactor, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if b.nrows() != f.n {
        return Err(Error::DimensionMismatch {
            what: "band solve right-hand side rows",
            expected: f.n,
            found: b.nrows(),
        });
    }
    let m = b.ncols();
    let mut rows = b.transpose().as_slice().to_vec();
    f.solve_adjoint_rows(&mut rows, m);
    Ok(DMatrix::from_row_slice(f.n, m, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandslice_testkit as tk;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn shifted(d: &BandedHermitian, z: C64) -> DMatrix<C64> {
        let n = d.n();
        DMatrix::<C64>::identity(n, n) * z - d.to_dense()
    }

    #[test]
    fn identity_shift_two() {
        let d = BandedHermitian::from_diagonal(&[1.0; 5]);
        let f = band_lu_factor(&d, C64::new(2.0, 0.0)).unwrap();
        let b = tk::random_hermitian(5, 1).columns(0, 2).into_owned();
        assert!(max_abs(&(band_solve(&f, &b).unwrap() - &b)) < 1e-15);
    }

    #[test]
    fn diagonal_resolvent() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        let z = C64::new(0.0, 1.0);
        let f = band_lu_factor(&d, z).unwrap();
        let mut e2 = DMatrix::<C64>::zeros(3, 1);
        e2[(1, 0)] = C64::new(1.0, 0.0);
        let x = band_solve(&f, &e2).unwrap();
        let expect = C64::new(1.0, 0.0) / (z - 2.0);
        assert!((x[(1, 0)] - expect).norm() < 1e-15);
        assert_eq!(x[(0, 0)], ZERO);
        assert_eq!(x[(2, 0)], ZERO);
    }

    #[test]
    fn random_band_residual() {
        let a = tk::random_banded(80, 4, 12);
        let d = BandedHermitian::from_dense(&a, 4).unwrap();
        let z = C64::new(0.5, 0.3);
        let f = band_lu_factor(&d, z).unwrap();
        let b = DMatrix::from_fn(80, 10, |i, j| {
            C64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, (i % 5) as f64)
        });
        let x = band_solve(&f, &b).unwrap();
        let m = shifted(&d, z);
        assert!(max_abs(&(&m * &x - &b)) <= 1e-11 * max_abs(&b));

        let y = band_solve_adjoint(&f, &b).unwrap();
        assert!(max_abs(&(m.adjoint() * &y - &b)) <= 1e-11 * max_abs(&b));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // real shift on a matrix whose shifted diagonal vanishes
        let mut d = BandedHermitian::zeros(4, 2);
        for i in 0..4 {
            d.set(i, i, C64::new(1.0, 0.0));
        }
        d.set(1, 0, C64::new(2.0, 0.0));
        d.set(3, 1, C64::new(0.0, 1.5));
        d.set(2, 1, C64::new(-1.0, 0.5));
        d.set(3, 2, C64::new(0.7, 0.0));
        d.set(2, 0, C64::new(0.3, 0.0));
        let z = C64::new(1.0, 0.0);
        let f = band_lu_factor(&d, z).unwrap();
        let b = DMatrix::from_fn(4, 3, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let x = band_solve(&f, &b).unwrap();
        assert!(max_abs(&(shifted(&d, z) * &x - &b)) < 1e-13);
    }

    #[test]
    fn singular_shift_is_reported() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        let r = band_lu_factor(&d, C64::new(2.0, 0.0));
        assert!(matches!(r, Err(Error::SingularShift { column: 1, .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        let f = band_lu_factor(&d, C64::new(0.0, 1.0)).unwrap();
        assert!(band_solve(&f, &DMatrix::zeros(4, 1)).is_err());
    }
}
