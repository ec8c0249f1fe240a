// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Dense Hermitian matrix in full column-major storage.
///
/// Construction verifies `a[i][j] == conj(a[j][i])` bit for bit, so every
/// instance is exactly Hermitian. `is_real` is set when all imaginary parts
/// are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    data: DMatrix<C64>,
    is_real: bool,
}

impl DenseHermitian {
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        check_square(&data)?;
        let n = data.nrows();
        for j in 0..n {
            for i in 0..=j {
                if data[(i, j)] != data[(j, i)].conj() {
                    return Err(Error::NotHermitian { row: i, col: j });
                }
            }
        }
        Ok(Self::from_parts(data))
    }

    /// Builds the matrix from its upper triangle; the strict lower triangle of
    /// `data` is ignored and overwritten by the mirrored conjugates.
    pub fn from_upper(mut data: DMatrix<C64>) -> Result<Self> {
        check_square(&data)?;
        let n = data.nrows();
        for j in 0..n {
            if data[(j, j)].im != 0.0 {
                return Err(Error::NotHermitian { row: j, col: j });
            }
            for i in 0..j {
                data[(j, i)] = data[(i, j)].conj();
            }
        }
        Ok(Self::from_parts(data))
    }

    pub fn from_real(data: &DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|x| C64::new(x, 0.0)))
    }

    fn from_parts(data: DMatrix<C64>) -> Self {
        let is_real = data.iter().all(|z| z.im == 0.0);
        Self { data, is_real }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest semibandwidth that contains every nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let n = self.n();
        let mut bw = 0;
        for j in 0..n {
            for i in j + 1..n {
                if self.data[(i, j)] != C64::new(0.0, 0.0) {
                    bw = bw.max(i - j);
                }
            }
        }
        bw
    }
}

fn check_square(data: &DMatrix<C64>) -> Result<()> {
    if data.nrows() != data.ncols() {
        return Err(Error::NotSquare {
            rows: data.nrows(),
            cols: data.ncols(),
        });
    }
    if data.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimension must be >= 1".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 1)] = C64::new(1.0, 1.0);
        m[(1, 0)] = C64::new(1.0, 1.0);
        assert!(matches!(
            DenseHermitian::new(m),
            Err(Error::NotHermitian { row: 0, col: 1 })
        ));
    }

    #[test]
    fn from_upper_mirrors_exactly() {
        let a = bandslice_testkit::random_hermitian(12, 5);
        let mut upper = a.clone();
        for j in 0..12 {
            for i in j + 1..12 {
                upper[(i, j)] = C64::new(f64::NAN, 0.0);
            }
        }
        let h = DenseHermitian::from_upper(upper).unwrap();
        assert_eq!(h.data(), &a);
        assert!(!h.is_real());
    }

    #[test]
    fn rejects_rectangular_and_empty() {
        assert!(matches!(
            DenseHermitian::new(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(DenseHermitian::new(DMatrix::zeros(0, 0)).is_err());
    }
}
