// SPDX-License-Identifier: Apache-2.0

//! Simulated process grid, block-cyclic and irregular 1D layouts, and the
//! redistributions between them over a deterministic message harness.

mod band;
mod grid;
mod harness;
mod redistribute;

pub use band::gather_band_to_compact;
pub use grid::{
    global_to_local, local_to_global, numroc, offsets, BlockCyclicLayout, Irregular1DLayout,
    ProcessGrid,
};
pub use harness::{
    caterpillar_rounds, Block, Execution, Harness, Message, PhaseTraffic, TrafficReport,
    ENTRY_BYTES,
};
pub use redistribute::{
    naive_redistribute, redistribute_1d_to_2d, redistribute_2d_to_1d, row_slabs, RowSlab,
    PHASE_COLUMNS, PHASE_GATHER, PHASE_ROWS, PHASE_SCATTER,
};
