// SPDX-License-Identifier: Apache-2.0

//! Shifted band solves for the contour filter and inertia counts for
//! spectrum partitioning and validation.

mod inertia;
mod lu;

pub use inertia::{count_below, inertia, Inertia};
pub use lu::{band_lu_factor, band_solve, band_solve_adjoint, ShiftedBandFactor};
