// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DenseHermitian;
use crate::C64;

pub const DEFAULT_TAU: f64 = 1e-4;

/// Synthetic sequence of related Hermitian matrices.
///
/// Element 0 is `a` itself; every later element scales each nonzero entry of
/// the upper triangle of `a` by `1 + tau * eta` with an independent
/// `eta ~ U[0, 1]` and mirrors it, so consecutive matrices share the sparsity
/// pattern and have close spectra.
pub fn perturb_sequence(
    a: &DenseHermitian,
    tau: f64,
    steps: usize,
    seed: u64,
) -> Vec<DenseHermitian> {
    assert!(tau >= 0.0, "tau must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = a.n();
    let mut out = Vec::with_capacity(steps);
    if steps == 0 {
        return out;
    }
    out.push(a.clone());
    for _ in 1..steps {
        let mut m = a.data().clone();
        for j in 0..n {
            for i in 0..=j {
                let v = m[(i, j)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let eta: f64 = rng.random_range(0.0..=1.0);
                m[(i, j)] = v * (1.0 + tau * eta);
            }
        }
        out.push(DenseHermitian::from_upper(m).expect("perturbation keeps the diagonal real"));
    }
    out
}

/// Random dense Hermitian matrix with standard normal entries in the upper
/// triangle (real and imaginary parts off the diagonal unless `real`).
pub fn random_hermitian(n: usize, seed: u64, real: bool) -> DenseHermitian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if real || i == j {
                0.0
            } else {
                rng.sample(StandardNormal)
            };
            m[(i, j)] = C64::new(re, im);
        }
    }
    DenseHermitian::from_upper(m).expect("diagonal is real")
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandslice_testkit as tk;

    #[test]
    fn zero_tau_is_identity() {
        let a = DenseHermitian::new(tk::random_hermitian(10, 1)).unwrap();
        let seq = perturb_sequence(&a, 0.0, 4, 9);
        assert_eq!(seq.len(), 4);
        assert!(seq.iter().all(|m| m == &a));
    }

    #[test]
    fn relative_change_bounded_and_pattern_kept() {
        let mut ones = DMatrix::<C64>::from_element(8, 8, C64::new(1.0, 0.0));
        ones[(0, 5)] = C64::new(0.0, 0.0);
        ones[(5, 0)] = C64::new(0.0, 0.0);
        let a = DenseHermitian::new(ones).unwrap();
        for m in perturb_sequence(&a, 1e-4, 5, 3) {
            for (x, y) in m.data().iter().zip(a.data().iter()) {
                if *y == C64::new(0.0, 0.0) {
                    assert_eq!(*x, *y);
                } else {
                    assert!(((x - y) / y).norm() <= 1e-4 * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn eigenvalues_move_within_weyl_bound() {
        let a = DenseHermitian::new(tk::random_hermitian(100, 21)).unwrap();
        let seq = perturb_sequence(&a, 1e-4, 2, 5);
        let before = tk::jacobi_eigenvalues(a.data());
        let after = tk::jacobi_eigenvalues(seq[1].data());
        let diff = seq[1].data() - a.data();
        // ||E||_2 <= ||E||_F <= tau ||A||_F
        let bound = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(bound <= 1e-4 * a.frobenius_norm());
        let worst = before
            .iter()
            .zip(&after)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst <= bound * (1.0 + 1e-9), "worst {worst} bound {bound}");
        assert!(worst > 0.0);
    }

    #[test]
    fn random_hermitian_is_seeded() {
        let a = random_hermitian(12, 4, false);
        assert_eq!(a, random_hermitian(12, 4, false));
        assert_ne!(a, random_hermitian(12, 5, false));
        assert!(!a.is_real());
        assert!(random_hermitian(12, 4, true).is_real());
    }
}
