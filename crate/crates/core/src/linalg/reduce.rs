// SPDX-License-Identifier: Apache-2.0

//! Dense-to-band reduction with blocked Householder panels.
//!
//! Panel `p` starts at column `j0 = p * bw` and eliminates everything below
//! row `j0 + bw` in columns `j0..j0 + bw` with a QR factorization of that
//! block. The reflectors are kept in compact WY form `Q_p = I - V T V^H` and
//! the trailing matrix is updated two-sided as `Q_p^H A22 Q_p`.
//!
//! With `Q = Q_1 Q_2 ... Q_P` the result is `D = Q^H A Q`, i.e. `U = Q^H` and
//! the eigenvectors of `A` are recovered as `X = U^H X_hat = Q X_hat`.

use nalgebra::DMatrix;

use super::{BandedHermitian, DenseHermitian, EigenPairs};
use crate::error::{Error, Result};
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// One block reflector `I - V T V^H` acting on rows `row_offset..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderPanel {
    pub row_offset: usize,
    /// Unit lower trapezoidal, ones stored explicitly.
    pub v: DMatrix<C64>,
    /// Upper triangular.
    pub t: DMatrix<C64>,
}

impl HouseholderPanel {
    /// `X <- (I - V T V^H) X` on the panel's rows.
    fn apply(&self, x: &mut DMatrix<C64>) {
        let m = self.v.nrows();
        let mut xs = x.rows_mut(self.row_offset, m);
        let y = &self.t * (self.v.adjoint() * &xs);
        xs -= &self.v * y;
    }

    /// `X <- (I - V T^H V^H) X` on the panel's rows.
    fn apply_adjoint(&self, x: &mut DMatrix<C64>) {
        let m = self.v.nrows();
        let mut xs = x.rows_mut(self.row_offset, m);
        let y = self.t.adjoint() * (self.v.adjoint() * &xs);
        xs -= &self.v * y;
    }
}

/// Accumulated unitary transformation of a band reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReductionTransform {
    n: usize,
    bw: usize,
    panels: Vec<HouseholderPanel>,
}

impl BandReductionTransform {
    pub fn identity(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            panels: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn panels(&self) -> &[HouseholderPanel] {
        &self.panels
    }

    /// `X <- U^H X`.
    pub fn apply_u_adjoint(&self, x: &mut DMatrix<C64>) -> Result<()> {
        self.check_rows(x)?;
        for p in self.panels.iter().rev() {
            p.apply(x);
        }
        Ok(())
    }

    /// `X <- U X`.
    pub fn apply_u(&self, x: &mut DMatrix<C64>) -> Result<()> {
        self.check_rows(x)?;
        for p in &self.panels {
            p.apply_adjoint(x);
        }
        Ok(())
    }

    /// The unitary `U` with `D = U A U^H`, formed explicitly.
    pub fn materialize_u(&self) -> DMatrix<C64> {
        let mut u = DMatrix::identity(self.n, self.n);
        // U = Q^H and Q^H I is built panel by panel
        self.apply_u(&mut u).expect("identity has matching rows");
        u
    }

    fn check_rows(&self, x: &DMatrix<C64>) -> Result<()> {
        if x.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                what: "backtransform rows",
                expected: self.n,
                found: x.nrows(),
            });
        }
        Ok(())
    }
}

/// Reduces `a` to a Hermitian band matrix of semibandwidth `bw`.
pub fn band_reduce(
    a: &DenseHermitian,
    bw: usize,
) -> Result<(BandedHermitian, BandReductionTransform)> {
    let n = a.n();
    if bw == 0 || bw >= n {
        return Err(Error::InvalidBandwidth { bw, n });
    }
    let mut w = a.data().clone();
    let mut panels = Vec::new();
    let mut j0 = 0;
    while j0 + bw + 1 < n {
        if let Some(panel) = reduce_panel(&mut w, j0, bw) {
            panels.push(panel);
        }
        j0 += bw;
    }

    let mut d = BandedHermitian::zeros(n, bw);
    for j in 0..n {
        for i in j..n.min(j + bw + 1) {
            d.set(i, j, w[(i, j)]);
        }
    }
    Ok((d, BandReductionTransform { n, bw, panels }))
}

fn reduce_panel(w: &mut DMatrix<C64>, j0: usize, bw: usize) -> Option<HouseholderPanel> {
    let n = w.nrows();
    let r0 = j0 + bw;
    let m = n - r0;
    let nb = bw.min(n - j0);
    let below_band_zero = (0..nb).all(|s| (r0 + s + 1..n).all(|i| w[(i, j0 + s)] == ZERO));
    if below_band_zero {
        return None;
    }

    let mut p = w.view((r0, j0), (m, nb)).into_owned();
    let k = m.min(nb);
    let mut v = DMatrix::<C64>::zeros(m, k);
    let mut tau = vec![ZERO; k];
    for s in 0..k {
        let col = &mut p.as_mut_slice()[s * m + s..(s + 1) * m];
        tau[s] = make_reflector(col);
        v[(s, s)] = C64::new(1.0, 0.0);
        for i in s + 1..m {
            v[(i, s)] = p[(i, s)];
            p[(i, s)] = ZERO;
        }
        if tau[s] != ZERO {
            let vs = v.view((s, s), (m - s, 1)).into_owned();
            let tc = tau[s].conj();
            for c in s + 1..nb {
                let mut pc = p.view_mut((s, c), (m - s, 1));
                let dot = vs.adjoint() * &pc;
                pc -= &vs * (dot[(0, 0)] * tc);
            }
        }
    }
    let t = form_t(&v, &tau);

    // two-sided update of the trailing block: A22 - V W^H - W V^H
    let a22 = w.view((r0, r0), (m, m)).into_owned();
    let x = &a22 * (&v * &t);
    let mm = t.adjoint() * (v.adjoint() * &x);
    let ww = x - (&v * mm) * C64::new(0.5, 0.0);
    let upd = a22 - &v * ww.adjoint() - &ww * v.adjoint();
    for j in 0..m {
        w[(r0 + j, r0 + j)] = C64::new(upd[(j, j)].re, 0.0);
        for i in j + 1..m {
            w[(r0 + i, r0 + j)] = upd[(i, j)];
            w[(r0 + j, r0 + i)] = upd[(i, j)].conj();
        }
    }
    for s in 0..nb {
        for i in 0..m {
            w[(r0 + i, j0 + s)] = p[(i, s)];
            w[(j0 + s, r0 + i)] = p[(i, s)].conj();
        }
    }

    Some(HouseholderPanel {
        row_offset: r0,
        v,
        t,
    })
}

/// Householder vector for `x` so that `H^H x = beta e_1` with
/// `H = I - tau v v^H`, `v[0] = 1`. On return `x[0] = beta` and `x[1..]`
/// holds `v[1..]`. A zero tail gives `tau = 0` and leaves `x` unchanged.
pub(crate) fn make_reflector(x: &mut [C64]) -> C64 {
    let alpha = x[0];
    let xnorm = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if xnorm == 0.0 {
        return ZERO;
    }
    let norm = alpha.norm().hypot(xnorm);
    let beta = if alpha.re >= 0.0 { -norm } else { norm };
    let tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
    let scale = C64::new(1.0, 0.0) / (alpha - beta);
    for z in &mut x[1..] {
        *z *= scale;
    }
    x[0] = C64::new(beta, 0.0);
    tau
}

/// Triangular factor of the forward, columnwise block reflector.
pub(crate) fn form_t(v: &DMatrix<C64>, tau: &[C64]) -> DMatrix<C64> {
    let k = tau.len();
    let mut t = DMatrix::<C64>::zeros(k, k);
    for s in 0..k {
        t[(s, s)] = tau[s];
        if s == 0 || tau[s] == ZERO {
            continue;
        }
        let w = v.columns(0, s).adjoint() * v.column(s);
        let col = t.view((0, 0), (s, s)) * w * (-tau[s]);
        t.view_mut((0, s), (s, 1)).copy_from(&col);
    }
    t
}

/// Recovers eigenvectors of `A` from eigenvectors of the band matrix.
pub fn backtransform(t: &BandReductionTransform, xhat: &EigenPairs) -> Result<EigenPairs> {
    let mut vectors = xhat.vectors.clone();
    t.apply_u_adjoint(&mut vectors)?;
    Ok(EigenPairs {
        values: xhat.values.clone(),
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bandslice_testkit as tk;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn already_banded_is_fixed_point() {
        let a = DenseHermitian::new(tk::random_banded(30, 3, 7)).unwrap();
        let (d, t) = band_reduce(&a, 4).unwrap();
        assert!(t.panels().is_empty());
        assert_eq!(&d.to_dense(), a.data());
    }

    #[test]
    fn diagonal_is_fixed_point() {
        let a = DenseHermitian::from_real(&DMatrix::from_diagonal(&nalgebra::dvector![
            1.0, 2.0, 3.0, 4.0
        ]))
        .unwrap();
        let (d, t) = band_reduce(&a, 1).unwrap();
        assert!(t.panels().is_empty());
        assert_eq!(&d.to_dense(), a.data());
    }

    #[test]
    fn invalid_bandwidth() {
        let a = DenseHermitian::new(tk::random_hermitian(5, 1)).unwrap();
        assert!(matches!(
            band_reduce(&a, 5),
            Err(Error::InvalidBandwidth { .. })
        ));
        assert!(matches!(
            band_reduce(&a, 0),
            Err(Error::InvalidBandwidth { .. })
        ));
    }

    #[test]
    fn spectrum_preserved_against_jacobi() {
        let a = DenseHermitian::new(tk::random_hermitian(50, 42)).unwrap();
        let reference = tk::jacobi_eigenvalues(a.data());
        let (d, _) = band_reduce(&a, 4).unwrap();
        let got = tk::jacobi_eigenvalues(&d.to_dense());
        assert!(tk::spectrum_mismatch(&got, &reference).unwrap() < 1e-10);
    }

    #[test]
    fn unitary_and_round_trip() {
        let eps = f64::EPSILON;
        for (n, bw) in [(37, 1), (40, 4), (64, 16), (25, 24)] {
            let a = DenseHermitian::new(tk::random_hermitian(n, n as u64)).unwrap();
            let (d, t) = band_reduce(&a, bw).unwrap();
            let u = t.materialize_u();
            let orth = max_abs(&(u.adjoint() * &u - DMatrix::identity(n, n)));
            assert!(orth <= 100.0 * eps * n as f64, "n={n} bw={bw} orth={orth}");
            let back = u.adjoint() * d.to_dense() * &u;
            let err = max_abs(&(back - a.data()));
            assert!(
                err <= 100.0 * eps * n as f64 * a.max_abs(),
                "n={n} bw={bw} err={err}"
            );
        }
    }

    #[test]
    fn real_input_stays_real() {
        let a = DenseHermitian::new(tk::random_symmetric(30, 9)).unwrap();
        let (d, t) = band_reduce(&a, 3).unwrap();
        assert!(d.is_real());
        assert!(t.materialize_u().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn identity_backtransform() {
        let t = BandReductionTransform::identity(6, 2);
        let x = EigenPairs {
            values: vec![1.0, 2.0],
            vectors: tk::random_hermitian(6, 1).columns(0, 2).into_owned(),
        };
        assert_eq!(backtransform(&t, &x).unwrap(), x);
        let bad = EigenPairs {
            values: vec![1.0],
            vectors: DMatrix::zeros(5, 1),
        };
        assert!(backtransform(&t, &bad).is_err());
    }

    #[test]
    fn backtransform_preserves_inner_products() {
        let a = DenseHermitian::new(tk::random_hermitian(40, 8)).unwrap();
        let (_, t) = band_reduce(&a, 5).unwrap();
        let x = tk::random_hermitian(40, 3).columns(0, 7).into_owned();
        let pairs = EigenPairs {
            values: vec![0.0; 7],
            vectors: x.clone(),
        };
        let y = backtransform(&t, &pairs).unwrap().vectors;
        let err = max_abs(&(y.adjoint() * &y - x.adjoint() * &x));
        assert!(err < 1e-12);
    }
}
