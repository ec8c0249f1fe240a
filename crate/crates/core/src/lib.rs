// SPDX-License-Identifier: Apache-2.0

//! Spectrum-slicing eigensolver for dense Hermitian matrices.
//!
//! The pipeline reduces a dense Hermitian matrix to band form with block
//! Householder transformations, computes the wanted part of the band
//! matrix's spectrum with a contour-integral subspace iteration over
//! independent spectral slices, and maps the eigenvectors back. A simulated
//! process grid carries the block-cyclic and irregular 1D data layouts that a
//! distributed run would use, together with the two-phase redistribution
//! algorithms between them.

// `!(a < b)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band_solver;
pub mod driver;
pub mod error;
pub mod feast;
pub mod layout;
pub mod linalg;
pub mod partition;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
