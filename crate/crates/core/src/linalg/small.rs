// SPDX-License-Identifier: Apache-2.0

//! Small dense kernels used inside the subspace iteration: pivoted Householder
//! orthonormalization and the reduced Hermitian eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};

use super::reduce::make_reflector;
use super::EigenPairs;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Orthonormal basis of the column space of `a` via Householder QR with
/// column pivoting.
///
/// Columns whose pivot falls below `sqrt(eps) * |R[0][0]|` are treated as
/// linearly dependent and dropped, so the result may have fewer columns than
/// `a`.
pub fn orthonormalize(a: &DMatrix<C64>) -> DMatrix<C64> {
    let m = a.nrows();
    let c = a.ncols();
    let kmax = m.min(c);
    let mut w = a.clone();
    let mut tau = Vec::with_capacity(kmax);
    let cutoff = f64::EPSILON.sqrt();
    let mut r00 = 0.0;
    let mut rank = 0;
    for s in 0..kmax {
        // exact trailing norms each step; no downdating
        let (best, best_norm) = (s..c)
            .map(|j| {
                let col = &w.as_slice()[j * m + s..(j + 1) * m];
                (j, col.iter().map(|z| z.norm_sqr()).sum::<f64>())
            })
            .fold((s, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let best_norm = best_norm.sqrt();
        if s == 0 {
            r00 = best_norm;
        }
        if best_norm == 0.0 || best_norm < cutoff * r00 {
            break;
        }
        w.swap_columns(s, best);
        let (left, right) = w.as_mut_slice().split_at_mut((s + 1) * m);
        let v = &mut left[s * m + s..];
        let t = make_reflector(v);
        if t != ZERO {
            let tc = t.conj();
            for col in right.chunks_exact_mut(m) {
                let tail = &mut col[s..];
                let dot = tail[0]
                    + v[1..]
                        .iter()
                        .zip(&tail[1..])
                        .map(|(vi, xi)| vi.conj() * xi)
                        .sum::<C64>();
                let f = tc * dot;
                tail[0] -= f;
                for (xi, vi) in tail[1..].iter_mut().zip(&v[1..]) {
                    *xi -= f * vi;
                }
            }
        }
        tau.push(t);
        rank = s + 1;
    }

    let mut q = DMatrix::<C64>::zeros(m, rank);
    for j in 0..rank {
        q[(j, j)] = C64::new(1.0, 0.0);
    }
    for s in (0..rank).rev() {
        let t = tau[s];
        if t == ZERO {
            continue;
        }
        let v = &w.as_slice()[s * m + s..(s + 1) * m];
        for col in q.as_mut_slice().chunks_exact_mut(m).skip(s) {
            let tail = &mut col[s..];
            let dot = tail[0]
                + v[1..]
                    .iter()
                    .zip(&tail[1..])
                    .map(|(vi, xi)| vi.conj() * xi)
                    .sum::<C64>();
            let f = t * dot;
            tail[0] -= f;
            for (xi, vi) in tail[1..].iter_mut().zip(&v[1..]) {
                *xi -= f * vi;
            }
        }
    }
    q
}

/// Full eigendecomposition of a small Hermitian matrix, ascending.
///
/// Only the lower triangle is read. Real input goes through the real
/// symmetric solver so real Ritz vectors stay real.
pub fn reduced_hermitian_eig(aq: &DMatrix<C64>) -> EigenPairs {
    let m = aq.nrows();
    assert_eq!(m, aq.ncols(), "reduced matrix must be square");
    if m == 0 {
        return EigenPairs {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let herm = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(aq[(i, i)].re, 0.0)
        } else if i > j {
            aq[(i, j)]
        } else {
            aq[(j, i)].conj()
        }
    });
    let (vals, vecs) = if herm.iter().all(|z| z.im == 0.0) {
        let e = SymmetricEigen::new(herm.map(|z| z.re));
        (
            e.eigenvalues.as_slice().to_vec(),
            e.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let e = SymmetricEigen::new(herm);
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    EigenPairs {
        values: order.iter().map(|&i| vals[i]).collect(),
        vectors: DMatrix::from_fn(m, m, |r, c| vecs[(r, order[c])]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthogonality;
    use bandslice_testkit as tk;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_reduced() {
        let e = reduced_hermitian_eig(&DMatrix::identity(4, 4));
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        // W is unitary; for the identity it is a permutation up to phases
        assert!(orthogonality(&e.vectors) < 1e-15);
    }

    #[test]
    fn two_by_two_swap() {
        let one = C64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[ZERO, one, one, ZERO]);
        let e = reduced_hermitian_eig(&a);
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // up to a global sign/phase
        let v0 = e.vectors.column(0);
        let ratio = v0[1] / v0[0];
        assert!((ratio + one).norm() < 1e-14);
        assert!((v0[0].norm() - s).abs() < 1e-14);
    }

    #[test]
    fn random_residual() {
        let a = tk::random_hermitian(30, 17);
        let e = reduced_hermitian_eig(&a);
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            30,
            e.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        assert!(max_abs(&(&a * &e.vectors - &e.vectors * lam)) <= 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn orthonormalize_spans_and_drops_dependent_columns() {
        let x = tk::random_hermitian(20, 4).columns(0, 5).into_owned();
        let mut y = DMatrix::<C64>::zeros(20, 7);
        y.columns_mut(0, 5).copy_from(&x);
        let c5 = x.column(0) * C64::new(2.0, -1.0) + x.column(3);
        y.column_mut(5).copy_from(&c5);
        y.column_mut(6).copy_from(&x.column(1));
        let q = orthonormalize(&y);
        assert_eq!(q.ncols(), 5);
        assert!(orthogonality(&q) < 1e-15);
        // projection of the input onto span(Q) reproduces it
        let proj = &q * (q.adjoint() * &y);
        assert!(max_abs(&(proj - &y)) < 1e-13);
    }
}
