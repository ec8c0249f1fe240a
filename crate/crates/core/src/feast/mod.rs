// SPDX-License-Identifier: Apache-2.0

//! Contour-integral subspace iteration for one slice of the spectrum of a
//! Hermitian band matrix.

mod contour;
mod slice;

pub use contour::{gauss_legendre, make_contour, ContourQuadrature, DEFAULT_NODES};
pub use slice::{
    feast_slice, random_block, subspace_size, FilterOperator, SliceResult, SliceSolveConfig,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
