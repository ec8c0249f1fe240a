// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_NODES: usize = 16;

/// Quadrature for the spectral projector of `[lower, upper]`.
///
/// The contour is the circle with the interval as diameter. `n_e` counts the
/// nodes on the whole circle; only the `n_e / 2` nodes in the upper half
/// plane are stored, the lower half being their conjugates with conjugate
/// weights. The weights already include the `1 / (2 pi i)` factor, so the
/// filter `sum_j w_j / (z_j - lambda)` is close to 1 inside the interval and
/// close to 0 outside.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourQuadrature {
    pub lower: f64,
    pub upper: f64,
    pub n_e: usize,
    /// Upper-half nodes, `Im z > 0`.
    pub nodes: Vec<C64>,
    pub weights: Vec<C64>,
}

impl ContourQuadrature {
    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lower && lambda <= self.upper
    }

    /// All `n_e` nodes and weights, upper half first.
    pub fn full_rule(&self) -> Vec<(C64, C64)> {
        let upper = self.nodes.iter().copied().zip(self.weights.iter().copied());
        let lower = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| (z.conj(), w.conj()));
        upper.chain(lower).collect()
    }

    /// Rational filter value at a real point.
    pub fn filter_value(&self, lambda: f64) -> f64 {
        let half: C64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w / (z - lambda))
            .sum();
        2.0 * half.re
    }
}

/// Builds the circle contour around `[a, b]` with `n_e` Gauss-Legendre nodes.
pub fn make_contour(a: f64, b: f64, n_e: usize) -> Result<ContourQuadrature> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInterval { lower: a, upper: b });
    }
    if n_e < 2 || !n_e.is_multiple_of(2) {
        return Err(Error::InvalidNodeCount(n_e));
    }
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let (x, wgl) = gauss_legendre(n_e / 2);
    let mut nodes = Vec::with_capacity(n_e / 2);
    let mut weights = Vec::with_capacity(n_e / 2);
    for (xk, wk) in x.iter().zip(&wgl) {
        let theta = 0.5 * PI * (1.0 + xk);
        let e = C64::from_polar(1.0, theta);
        nodes.push(C64::new(c, 0.0) + e * r);
        // (1 / 2 pi i) dz = r e^{i theta} d theta / (2 pi), d theta = (pi / 2) w_k
        weights.push(e * (0.25 * r * wk));
    }
    Ok(ContourQuadrature {
        lower: a,
        upper: b,
        n_e,
        nodes,
        weights,
    })
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// `P_m(t)` and its derivative.
fn legendre(m: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 4, 8] {
            let (x, w) = gauss_legendre(m);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact up to degree 2m - 1
            let deg = 2 * m - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-14, "m={m}");
        }
    }

    #[test]
    fn nodes_lie_on_upper_half_circle() {
        let q = make_contour(-1.0, 3.0, 16).unwrap();
        assert_eq!(q.nodes.len(), 8);
        for z in &q.nodes {
            assert!(z.im > 0.0);
            assert!(((z - 1.0).norm() - 2.0).abs() < 1e-14);
        }
        assert_eq!(q.full_rule().len(), 16);
    }

    #[test]
    fn symmetric_interval_nodes_reflect() {
        let q = make_contour(-2.0, 2.0, 8).unwrap();
        for z in &q.nodes {
            let mirrored = -z.conj();
            assert!(q.nodes.iter().any(|y| (y - mirrored).norm() < 1e-14));
        }
    }

    #[test]
    fn filter_is_indicator_like() {
        let q = make_contour(0.0, 1.0, 16).unwrap();
        assert!(q.filter_value(0.5) >= 0.99);
        assert!(q.filter_value(0.2) >= 0.9 && q.filter_value(0.8) >= 0.9);
        assert!(q.filter_value(-0.5).abs() <= 0.1);
        assert!(q.filter_value(2.0).abs() <= 0.1);
        let q8 = make_contour(0.0, 1.0, 8).unwrap();
        assert!((q8.filter_value(0.5) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            make_contour(1.0, 1.0, 8),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(matches!(
            make_contour(0.0, 1.0, 7),
            Err(Error::InvalidNodeCount(7))
        ));
        assert!(matches!(
            make_contour(0.0, 1.0, 0),
            Err(Error::InvalidNodeCount(0))
        ));
    }
}
