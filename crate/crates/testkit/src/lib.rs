// SPDX-License-Identifier: Apache-2.0

//! Test support: a dense cyclic-Jacobi reference eigensolver and seeded
//! generators for random Hermitian and banded matrices.
//!
//! Nothing in here depends on the `bandslice` crate, so the reference results
//! stay independent of the code paths they are used to check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

/// Result of the reference eigensolver.
pub struct JacobiEig {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Eigenvectors, column `i` belongs to `values[i]`.
    pub vectors: DMatrix<C64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigensolver for a dense Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry and then applies
/// a real plane rotation, so the iteration never leaves Hermitian form.
pub fn jacobi_eig(a: &DMatrix<C64>) -> JacobiEig {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eig needs a square matrix");
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let mut v = DMatrix::<C64>::identity(n, n);
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut sweeps = 0;
    while sweeps < 60 {
        let off: f64 = (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * fro || off == 0.0 {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // phase that makes the pivot real: apq = |apq| e^{i phi}
                let ph = apq / mag;
                let ph_conj = ph.conj();
                rotate_columns(&mut m, p, q, c, s, ph_conj);
                // rows p, q: mirror of the updated columns
                for k in 0..n {
                    if k != p && k != q {
                        let cp = m[(k, p)].conj();
                        let cq = m[(k, q)].conj();
                        m[(p, k)] = cp;
                        m[(q, k)] = cq;
                    }
                }
                m[(p, p)] = C64::new(app - t * mag, 0.0);
                m[(q, q)] = C64::new(aqq + t * mag, 0.0);
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                rotate_columns(&mut v, p, q, c, s, ph_conj);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    JacobiEig {
        values,
        vectors,
        sweeps,
    }
}

fn rotate_columns(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: f64, ph_conj: C64) {
    let n = m.nrows();
    for k in 0..n {
        let xp = m[(k, p)];
        let xq = m[(k, q)] * ph_conj;
        m[(k, p)] = xp * c - xq * s;
        m[(k, q)] = xp * s + xq * c;
    }
}

/// Ascending eigenvalues of a dense Hermitian matrix.
pub fn jacobi_eigenvalues(a: &DMatrix<C64>) -> Vec<f64> {
    jacobi_eig(a).values
}

/// Number of reference eigenvalues strictly below `s`.
pub fn count_below(values: &[f64], s: f64) -> usize {
    values.iter().filter(|&&v| v < s).count()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random complex Hermitian matrix, entries uniform in [-1, 1] (real and
/// imaginary parts independently), real diagonal.
pub fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    let mut a = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        a[(j, j)] = C64::new(r.random_range(-1.0..1.0), 0.0);
        for i in 0..j {
            let z = C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Random real symmetric matrix stored as complex.
pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    let mut a = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let x = C64::new(r.random_range(-1.0..1.0), 0.0);
            a[(i, j)] = x;
            a[(j, i)] = x;
        }
    }
    a
}

/// Random Hermitian matrix with semibandwidth `bw`, zero outside the band.
pub fn random_banded(n: usize, bw: usize, seed: u64) -> DMatrix<C64> {
    let mut r = rng(seed);
    let mut a = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        a[(j, j)] = C64::new(r.random_range(-1.0..1.0), 0.0);
        for i in j + 1..n.min(j + bw + 1) {
            let z = C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
        }
    }
    a
}

/// Hermitian matrix `V diag(values) V^H` with a random unitary `V`.
pub fn hermitian_with_spectrum(values: &[f64], seed: u64) -> DMatrix<C64> {
    let n = values.len();
    let g = random_hermitian(n, seed ^ 0x9e37_79b9_7f4a_7c15);
    let v = jacobi_eig(&g).vectors;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        values.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let a = &v * d * v.adjoint();
    // exact Hermitian symmetry
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(a[(i, i)].re, 0.0)
        } else if i < j {
            a[(i, j)]
        } else {
            a[(j, i)].conj()
        }
    })
}

/// Maximum relative mismatch between two ascending spectra, scaled by the
/// spectral radius of the reference. `None` when the lengths differ.
pub fn spectrum_mismatch(found: &[f64], reference: &[f64]) -> Option<f64> {
    if found.len() != reference.len() {
        return None;
    }
    let scale = reference
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    Some(
        found
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_two_by_two() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        );
        let e = jacobi_eig(&a);
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_residual_and_planted_spectrum() {
        let a = random_hermitian(40, 3);
        let e = jacobi_eig(&a);
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            40,
            e.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let r = &a * &e.vectors - &e.vectors * lam;
        assert!(r.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);

        let planted: Vec<f64> = (0..30).map(|i| i as f64 * 0.5 - 3.0).collect();
        let b = hermitian_with_spectrum(&planted, 11);
        let got = jacobi_eigenvalues(&b);
        assert!(spectrum_mismatch(&got, &planted).unwrap() < 1e-13);
    }
}
