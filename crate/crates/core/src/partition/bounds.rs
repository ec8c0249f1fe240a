// SPDX-License-Identifier: Apache-2.0

use log::debug;

use super::{PartitionSource, SpectrumPartition};
use crate::band_solver::{count_below, inertia};
use crate::error::{Error, Result};
use crate::linalg::BandedHermitian;

pub const DEFAULT_ALPHA: f64 = 1e-3;
pub const DEFAULT_BOUND_ATTEMPTS: usize = 8;
const ALPHA_CAP: f64 = 1e-1;
// first nonzero margin when the configured one is zero
const ALPHA_FLOOR: f64 = 1e-6;

/// Margins used to turn prior eigenvalues into an outer search interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    /// Relative margin above the `nev`-th prior value. Only its magnitude is
    /// used; the direction is chosen so the bound moves outward.
    pub alpha: f64,
    /// Relative margin below the smallest prior value.
    pub beta: f64,
    pub max_attempts: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_ALPHA,
            max_attempts: DEFAULT_BOUND_ATTEMPTS,
        }
    }
}

impl BoundConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.abs() <= ALPHA_CAP) || !(self.beta.abs() <= ALPHA_CAP) {
            return Err(Error::InvalidArgument(format!(
                "bound margins must not exceed {ALPHA_CAP} in magnitude"
            )));
        }
        Ok(())
    }
}

/// `x` moved outward by the relative margin `margin`, upward when `up`.
fn offset(x: f64, margin: f64, up: bool, scale: f64) -> f64 {
    let base = if x != 0.0 { x.abs() } else { scale };
    if up {
        x + margin * base
    } else {
        x - margin * base
    }
}

/// Outer interval `[b0, bk]` for the `nev` smallest eigenvalues of `d`,
/// starting from the prior estimates `prior` (ascending).
///
/// Each bound is widened geometrically until the inertia of `d` confirms it:
/// no eigenvalue below `b0` and at least `nev` below `bk`.
pub fn compute_bounds(
    prior: &[f64],
    nev: usize,
    cfg: &BoundConfig,
    d: &BandedHermitian,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if nev == 0 || nev > d.n() || prior.len() < nev {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= nev <= n and at least nev prior values (nev {nev}, n {}, priors {})",
            d.n(),
            prior.len()
        )));
    }
    let scale = d.frobenius_norm() / (d.n() as f64).sqrt();
    let top = prior[nev - 1];
    let bottom = prior[0];

    let mut alpha = cfg.alpha.abs();
    let mut bk = None;
    for attempt in 0..cfg.max_attempts {
        let b = offset(top, alpha, true, scale);
        let c = inertia(d, b);
        // a bound sitting on an eigenvalue is moved as well
        if !c.perturbed && c.n_neg >= nev {
            bk = Some(b);
            break;
        }
        debug!("upper bound {b} attempt {attempt} too low");
        alpha = if alpha == 0.0 {
            ALPHA_FLOOR
        } else {
            2.0 * alpha
        };
    }
    let bk = bk.ok_or(Error::BoundsExhausted {
        which: "upper",
        attempts: cfg.max_attempts,
    })?;

    let mut beta = cfg.beta.abs();
    let mut b0 = None;
    for attempt in 0..cfg.max_attempts {
        let b = offset(bottom, beta, false, scale);
        let c = inertia(d, b);
        if !c.perturbed && c.n_neg == 0 {
            b0 = Some(b);
            break;
        }
        debug!("lower bound {b} attempt {attempt} too high");
        beta = if beta == 0.0 { ALPHA_FLOOR } else { 2.0 * beta };
    }
    let b0 = b0.ok_or(Error::BoundsExhausted {
        which: "lower",
        attempts: cfg.max_attempts,
    })?;
    Ok((b0, bk))
}

/// Outer interval for the `nev` smallest eigenvalues without prior
/// estimates, by inertia bisection from the Gershgorin interval. The lower
/// bound sits just below the smallest eigenvalue and the upper bound in the
/// gap above the `nev`-th one.
pub fn bounds_by_inertia(d: &BandedHermitian, nev: usize) -> Result<(f64, f64)> {
    let n = d.n();
    if nev == 0 || nev > n {
        return Err(Error::InvalidArgument(format!(
            "nev {nev} must be in 1..={n}"
        )));
    }
    let (lo, hi) = d.gershgorin();
    let width = (hi - lo).max(lo.abs()).max(hi.abs());
    let pad = if width > 0.0 { 1e-3 * width } else { 1.0 };
    let (glo, ghi) = (lo - pad, hi + pad);
    // Gershgorin bounds can be far from the spectrum; a loose b0 widens the
    // first slice and slows its convergence
    let first = bracket(d, glo, ghi, 1).0;
    let upper_nev = bracket(d, glo, ghi, nev).1;
    let span = upper_nev - first;
    let margin = if span > 0.0 { 1e-2 * span } else { pad };
    let b0 = first - margin;
    if nev == n {
        return Ok((b0, upper_nev + margin));
    }
    let lower_next = bracket(d, glo, ghi, nev + 1).0;
    let bk = if lower_next > upper_nev {
        0.5 * (upper_nev + lower_next)
    } else {
        upper_nev
    };
    Ok((b0, bk))
}

/// Interval `(l, h]` containing the `j`-th smallest eigenvalue, with
/// `count_below(l) < j <= count_below(h)`, shrunk to roughly machine
/// precision.
fn bracket(d: &BandedHermitian, mut l: f64, mut h: f64, j: usize) -> (f64, f64) {
    for _ in 0..200 {
        let m = 0.5 * (l + h);
        if m <= l || m >= h || h - l <= 4.0 * f64::EPSILON * l.abs().max(h.abs()) {
            break;
        }
        if count_below(d, m) >= j {
            h = m;
        } else {
            l = m;
        }
    }
    (l, h)
}

/// Partition of `[b0, bk]` by recursive inertia bisection: a slice is split
/// at its midpoint while it holds more than `ceil(nev / k) * 3 / 2`
/// eigenvalues.
pub fn inertia_partition(
    d: &BandedHermitian,
    b0: f64,
    bk: f64,
    nev: usize,
    k: usize,
) -> Result<SpectrumPartition> {
    if !(b0 < bk) {
        return Err(Error::InvalidInterval {
            lower: b0,
            upper: bk,
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument(
            "slice count must be positive".into(),
        ));
    }
    let limit = (3 * nev.div_ceil(k)).div_ceil(2).max(1);
    let min_width = 1e-7 * bk.abs().max(b0.abs()).max(1.0);
    let c0 = count_below(d, b0);
    let ck = count_below(d, bk);
    // stack of (lo, hi, count_below(lo), count_below(hi)), processed left first
    let mut stack = vec![(b0, bk, c0, ck)];
    let mut boundaries = vec![b0];
    let mut counts = Vec::new();
    while let Some((lo, hi, cl, ch)) = stack.pop() {
        if ch - cl > limit && hi - lo > min_width {
            let mid = 0.5 * (lo + hi);
            let cm = count_below(d, mid);
            stack.push((mid, hi, cm, ch));
            stack.push((lo, mid, cl, cm));
            continue;
        }
        boundaries.push(hi);
        counts.push(ch - cl);
    }
    // drop empty slices by merging them into their right neighbour
    let mut b = vec![boundaries[0]];
    let mut c = Vec::new();
    for (i, &cnt) in counts.iter().enumerate() {
        if cnt == 0 && i + 1 < counts.len() {
            continue;
        }
        b.push(boundaries[i + 1]);
        c.push(cnt);
    }
    SpectrumPartition::new(b, c, PartitionSource::InertiaBisection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandslice_testkit as tk;

    fn random_band(n: usize, bw: usize, seed: u64) -> (BandedHermitian, Vec<f64>) {
        let a = tk::random_banded(n, bw, seed);
        (
            BandedHermitian::from_dense(&a, bw).unwrap(),
            tk::jacobi_eigenvalues(&a),
        )
    }

    #[test]
    fn exact_priors_enclose_nev() {
        let (d, ev) = random_band(80, 4, 3);
        let (b0, bk) = compute_bounds(&ev, 20, &BoundConfig::default(), &d).unwrap();
        assert!(b0 < ev[0] && bk > ev[19]);
        assert_eq!(count_below(&d, b0), 0);
        assert!(count_below(&d, bk) >= 20);
    }

    #[test]
    fn zero_alpha_on_eigenvalue_recovers() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let cfg = BoundConfig {
            alpha: 0.0,
            beta: 0.0,
            max_attempts: 8,
        };
        let (b0, bk) = compute_bounds(&[1.0, 2.0, 3.0, 4.0], 2, &cfg, &d).unwrap();
        assert!(bk > 2.0 && bk < 3.0);
        assert!(b0 < 1.0);
    }

    #[test]
    fn negative_top_moves_up() {
        let d = BandedHermitian::from_diagonal(&[-5.0, -3.0, -1.0]);
        let (b0, bk) = compute_bounds(&[-5.0, -3.0, -1.0], 2, &BoundConfig::default(), &d).unwrap();
        assert!(bk > -3.0 && bk < -1.0);
        assert!(b0 < -5.0);
    }

    #[test]
    fn exhausted_budget_errors() {
        let d = BandedHermitian::from_diagonal(&[1.0, 2.0, 3.0]);
        // priors far below the truth
        let r = compute_bounds(&[0.1, 0.2, 0.3], 2, &BoundConfig::default(), &d);
        assert!(matches!(
            r,
            Err(Error::BoundsExhausted { which: "upper", .. })
        ));
    }

    #[test]
    fn rejects_large_alpha() {
        let d = BandedHermitian::from_diagonal(&[1.0]);
        let cfg = BoundConfig {
            alpha: 0.5,
            ..BoundConfig::default()
        };
        assert!(compute_bounds(&[1.0], 1, &cfg, &d).is_err());
    }

    #[test]
    fn inertia_bounds_and_partition() {
        let (d, ev) = random_band(150, 5, 11);
        let nev = 60;
        let (b0, bk) = bounds_by_inertia(&d, nev).unwrap();
        assert_eq!(count_below(&d, b0), 0);
        assert_eq!(count_below(&d, bk), nev);
        assert!(bk > ev[nev - 1] && bk < ev[nev]);
        let p = inertia_partition(&d, b0, bk, nev, 4).unwrap();
        assert_eq!(p.source, PartitionSource::InertiaBisection);
        assert_eq!(p.counts.iter().sum::<usize>(), nev);
        for (i, &c) in p.counts.iter().enumerate() {
            assert!(c <= 23);
            let (lo, hi) = p.slice(i);
            let want = ev.iter().filter(|&&x| x > lo && x <= hi).count();
            assert_eq!(c, want);
        }
    }

    #[test]
    fn full_spectrum_bounds() {
        let (d, ev) = random_band(40, 3, 2);
        let (b0, bk) = bounds_by_inertia(&d, 40).unwrap();
        assert!(b0 < ev[0] && bk > ev[39]);
    }
}
