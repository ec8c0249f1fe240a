// SPDX-License-Identifier: Apache-2.0

//! Sylvester inertia of `D - sI` from a count-only band `LDL^H` sweep.
//!
//! The sweep eliminates one column at a time inside a copy of the lower band
//! and keeps only the signs of the pivots; `L` is never stored.

use crate::linalg::BandedHermitian;
use crate::C64;

/// Eigenvalue sign counts of `D - sI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
    /// Shift actually used. Differs from the requested one when a near-zero
    /// pivot forced a retry.
    pub shift: f64,
    pub perturbed: bool,
}

impl Inertia {
    pub fn n(&self) -> usize {
        self.n_neg + self.n_zero + self.n_pos
    }
}

/// Inertia of `D - sI`.
///
/// Pivots with `|p| <= eps * ||D||_F` count as zero. If any occur, the shift
/// is moved up by `sqrt(eps) * ||D||_F` and the count repeated once; the
/// second result is returned with `perturbed` set, and may still report
/// zeros.
pub fn inertia(d: &BandedHermitian, s: f64) -> Inertia {
    let fro = d.frobenius_norm();
    let tol = f64::EPSILON * fro;
    let first = count(d, s, tol);
    if first.n_zero == 0 {
        return first;
    }
    let s2 = s + f64::EPSILON.sqrt() * fro.max(f64::MIN_POSITIVE);
    Inertia {
        perturbed: true,
        ..count(d, s2, tol)
    }
}

/// Number of eigenvalues strictly below `s`; shorthand for
/// `inertia(d, s).n_neg`.
pub fn count_below(d: &BandedHermitian, s: f64) -> usize {
    inertia(d, s).n_neg
}

fn count(d: &BandedHermitian, s: f64, tol: f64) -> Inertia {
    let n = d.n();
    let bw = d.bandwidth();
    let ld = bw + 1;
    let mut w: Vec<C64> = d.storage().to_vec();
    for j in 0..n {
        w[j * ld].re -= s;
    }
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    for j in 0..n {
        let mut p = w[j * ld].re;
        if p.abs() <= tol {
            zero += 1;
            // keep eliminating with a tiny pivot of the same sign
            let mag = tol.max(f64::MIN_POSITIVE);
            p = if p < 0.0 { -mag } else { mag };
        } else if p < 0.0 {
            neg += 1;
        } else {
            pos += 1;
        }
        let lm = bw.min(n - 1 - j);
        if lm == 0 {
            continue;
        }
        let inv = 1.0 / p;
        let (head, tail) = w.split_at_mut((j + 1) * ld);
        let col = &head[j * ld..];
        // entry (j+i, j+k) lives at (i-k) + (j+k)*ld
        for k in 1..=lm {
            let f = col[k].conj() * inv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            let target = &mut tail[(k - 1) * ld..(k - 1) * ld + (lm - k + 1)];
            for (t, l) in target.iter_mut().zip(&col[k..=lm]) {
                *t -= l * f;
            }
        }
    }
    Inertia {
        n_neg: neg,
        n_zero: zero,
        n_pos: pos,
        shift: s,
        perturbed: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandslice_testkit as tk;

    #[test]
    fn diagonal_counts() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        let r = inertia(&d, 2.5);
        assert_eq!((r.n_neg, r.n_zero, r.n_pos), (2, 0, 1));
        let r = inertia(&d, -10.0);
        assert_eq!((r.n_neg, r.n_zero, r.n_pos), (0, 0, 3));
    }

    #[test]
    fn exact_eigenvalue_shift_is_perturbed() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        let r = inertia(&d, 2.0);
        assert!(r.perturbed);
        assert!(r.shift > 2.0);
        assert_eq!((r.n_neg, r.n_zero, r.n_pos), (2, 0, 1));
    }

    #[test]
    fn median_shift_matches_oracle() {
        let a = tk::random_banded(100, 6, 77);
        let d = BandedHermitian::from_dense(&a, 6).unwrap();
        let ev = tk::jacobi_eigenvalues(&a);
        let s = 0.5 * (ev[49] + ev[50]);
        let r = inertia(&d, s);
        assert_eq!(r.n_neg, 50);
        assert_eq!(r.n_neg, tk::count_below(&ev, s));
        assert_eq!(r.n(), 100);
    }

    #[test]
    fn monotone_in_shift() {
        let a = tk::random_banded(60, 3, 5);
        let d = BandedHermitian::from_dense(&a, 3).unwrap();
        let mut last = 0;
        for k in 0..200 {
            let s = -8.0 + 16.0 * k as f64 / 199.0;
            let c = count_below(&d, s);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(last, 60);
    }
}
