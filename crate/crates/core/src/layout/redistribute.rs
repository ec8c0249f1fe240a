// SPDX-License-Identifier: Apache-2.0

//! Irregular 1D column layout to 2D block-cyclic and back, in two phases.
//!
//! Going 1D to 2D, phase one runs inside each grid column: every owner cuts
//! its columns into the row blocks of each grid row and sends them there.
//! Afterwards rank `(r, c)` holds a row slab: the rows of grid row `r` for
//! all columns owned in grid column `c`. Phase two runs inside each grid row
//! as pairwise rounds and moves every column of the slab to the grid column
//! that owns it in the block-cyclic layout. The reverse transform runs the
//! same two steps backwards.
//!
//! Within a message, blocks are ordered by row block, then by column.

use std::ops::Range;

use nalgebra::DMatrix;

use super::grid::{global_to_local, offsets, BlockCyclicLayout, Irregular1DLayout, ProcessGrid};
use super::harness::{caterpillar_rounds, Execution, Harness, Message, TrafficReport};
use crate::error::{Error, Result};
use crate::C64;

pub const PHASE_COLUMNS: &str = "column-groups";
pub const PHASE_ROWS: &str = "row-groups";
pub const PHASE_GATHER: &str = "gather";
pub const PHASE_SCATTER: &str = "scatter";

/// Rows of one grid row for all columns owned within one grid column.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSlab {
    /// Global rows, ascending.
    pub rows: Vec<usize>,
    /// Global columns, a contiguous range.
    pub cols: Range<usize>,
    pub data: DMatrix<C64>,
}

impl RowSlab {
    fn empty(rows: Vec<usize>, cols: Range<usize>) -> Self {
        let data = DMatrix::zeros(rows.len(), cols.len());
        Self { rows, cols, data }
    }
}

/// Row ranges of the blocks that grid row `r` owns.
fn row_blocks(n_rows: usize, nb: usize, r: usize, p: usize) -> Vec<Range<usize>> {
    (r..n_rows.div_ceil(nb))
        .step_by(p)
        .map(|b| b * nb..((b + 1) * nb).min(n_rows))
        .collect()
}

/// Pieces of `cols` that fall in block columns owned by grid column `c`.
fn col_runs(cols: Range<usize>, nb: usize, c: usize, q: usize) -> Vec<Range<usize>> {
    if cols.is_empty() {
        return Vec::new();
    }
    let first = cols.start / nb;
    let last = (cols.end - 1) / nb;
    (first..=last)
        .filter(|b| b % q == c)
        .map(|b| (b * nb).max(cols.start)..((b + 1) * nb).min(cols.end))
        .collect()
}

fn check_1d(counts: &[usize], grid: ProcessGrid, nb: usize) -> Result<()> {
    if counts.len() != grid.size() {
        return Err(Error::Layout(format!(
            "{} column counts for a grid of {} ranks",
            counts.len(),
            grid.size()
        )));
    }
    if nb == 0 {
        return Err(Error::Layout("block size must be positive".into()));
    }
    Ok(())
}

fn partner(round: &[(usize, usize)], c: usize) -> Option<usize> {
    round.iter().find_map(|&(a, b)| {
        if a == c {
            Some(b)
        } else if b == c {
            Some(a)
        } else {
            None
        }
    })
}

/// Row-group exchange: the local part first, then pairwise rounds in which
/// each rank trades with one partner of its grid row. `send_to(rank, state,
/// grid_col)` builds the message for the rank of the same grid row in
/// `grid_col`.
fn row_phase<S, F, G>(
    h: &mut Harness,
    states: &mut [S],
    grid: ProcessGrid,
    send_to: F,
    place: G,
) -> Result<()>
where
    S: Send + Sync,
    F: Fn(usize, &S, usize) -> Option<Message> + Sync,
    G: Fn(usize, &mut S, Vec<Message>) + Sync,
{
    h.exchange(
        PHASE_ROWS,
        states,
        |s, d| s == d,
        |rank, st| send_to(rank, st, grid.coords(rank).1).into_iter().collect(),
        &place,
    )?;
    for round in caterpillar_rounds(grid.q) {
        h.exchange(
            PHASE_ROWS,
            states,
            |s, d| {
                let (rs, cs) = grid.coords(s);
                let (rd, cd) = grid.coords(d);
                rs == rd && partner(&round, cs) == Some(cd)
            },
            |rank, st| match partner(&round, grid.coords(rank).1) {
                Some(dc) => send_to(rank, st, dc).into_iter().collect(),
                None => Vec::new(),
            },
            &place,
        )?;
    }
    Ok(())
}

struct Forward {
    input: DMatrix<C64>,
    slab: RowSlab,
    tile: DMatrix<C64>,
}

/// Runs the column-group phase and returns the row slabs of every rank.
pub fn row_slabs(x: &Irregular1DLayout, grid: ProcessGrid, nb: usize) -> Result<Vec<RowSlab>> {
    let mut h = Harness::new(Execution::Sequential);
    let (states, _) = forward_phase_one(&mut h, x, grid, nb)?;
    Ok(states.into_iter().map(|s| s.slab).collect())
}

fn forward_phase_one(
    h: &mut Harness,
    x: &Irregular1DLayout,
    grid: ProcessGrid,
    nb: usize,
) -> Result<(Vec<Forward>, BlockCyclicLayout)> {
    check_1d(&x.counts, grid, nb)?;
    let target = BlockCyclicLayout::zeros(x.n_rows, x.total(), nb, nb, grid)?;
    let off = offsets(&x.counts);
    let p = grid.p;
    let mut states: Vec<Forward> = (0..grid.size())
        .map(|rank| {
            let (r, c) = grid.coords(rank);
            Forward {
                input: x.locals[rank].clone(),
                slab: RowSlab::empty(target.rows_of(r), off[c * p]..off[(c + 1) * p]),
                tile: target.tiles[rank].clone(),
            }
        })
        .collect();

    let n_rows = x.n_rows;
    h.exchange(
        PHASE_COLUMNS,
        &mut states,
        |s, d| grid.coords(s).1 == grid.coords(d).1,
        |rank, st| {
            let (_, c) = grid.coords(rank);
            let cols = off[rank]..off[rank + 1];
            if cols.is_empty() {
                return Vec::new();
            }
            grid.col_group(c)
                .into_iter()
                .enumerate()
                .filter_map(|(r, dst)| {
                    let mut m = Message::new(rank, dst, PHASE_COLUMNS);
                    for rows in row_blocks(n_rows, nb, r, p) {
                        m.push_block(rows, cols.clone(), |i, j| st.input[(i, j - cols.start)]);
                    }
                    (!m.blocks.is_empty()).then_some(m)
                })
                .collect()
        },
        |_, st, msgs| {
            for m in msgs {
                m.for_each(|i, j, v| {
                    let li = global_to_local(i, nb, p).1;
                    st.slab.data[(li, j - st.slab.cols.start)] = v;
                });
            }
        },
    )?;
    Ok((states, target))
}

/// Moves an irregular 1D column layout to a 2D block-cyclic layout with
/// square `nb` blocks on `grid`. Rank `i` of the 1D layout is grid rank `i`.
pub fn redistribute_1d_to_2d(
    x: &Irregular1DLayout,
    grid: ProcessGrid,
    nb: usize,
    execution: Execution,
) -> Result<(BlockCyclicLayout, TrafficReport)> {
    let mut h = Harness::new(execution);
    let (mut states, mut target) = forward_phase_one(&mut h, x, grid, nb)?;
    let (p, q) = (grid.p, grid.q);

    let n_rows = x.n_rows;
    let send_to = |rank: usize, st: &Forward, dc: usize| -> Option<Message> {
        let r = grid.coords(rank).0;
        let dst = grid.rank(r, dc);
        let slab = &st.slab;
        let mut m = Message::new(rank, dst, PHASE_ROWS);
        for rows in row_blocks(n_rows, nb, r, p) {
            for cols in col_runs(slab.cols.clone(), nb, dc, q) {
                m.push_block(rows.clone(), cols, |i, j| {
                    slab.data[(global_to_local(i, nb, p).1, j - slab.cols.start)]
                });
            }
        }
        (!m.blocks.is_empty()).then_some(m)
    };
    let place = |_: usize, st: &mut Forward, msgs: Vec<Message>| {
        for m in msgs {
            m.for_each(|i, j, v| {
                st.tile[(global_to_local(i, nb, p).1, global_to_local(j, nb, q).1)] = v;
            });
        }
    };

    row_phase(&mut h, &mut states, grid, send_to, place)?;
    for (tile, st) in target.tiles.iter_mut().zip(states) {
        *tile = st.tile;
    }
    Ok((target, h.finish()))
}

struct Backward {
    tile: DMatrix<C64>,
    slab: RowSlab,
    output: DMatrix<C64>,
}

/// Inverse of [`redistribute_1d_to_2d`]: returns the irregular 1D layout
/// with per-rank column counts `counts`.
pub fn redistribute_2d_to_1d(
    x: &BlockCyclicLayout,
    counts: &[usize],
    execution: Execution,
) -> Result<(Irregular1DLayout, TrafficReport)> {
    let grid = x.grid;
    let nb = x.nb;
    check_1d(counts, grid, nb)?;
    if x.mb != x.nb {
        return Err(Error::Layout("square blocks required".into()));
    }
    let total: usize = counts.iter().sum();
    if total != x.n_cols {
        return Err(Error::Layout(format!(
            "counts sum to {total} but the layout has {} columns",
            x.n_cols
        )));
    }
    let off = offsets(counts);
    let (p, q) = (grid.p, grid.q);
    let n_rows = x.n_rows;
    let mut states: Vec<Backward> = (0..grid.size())
        .map(|rank| {
            let (r, c) = grid.coords(rank);
            Backward {
                tile: x.tiles[rank].clone(),
                slab: RowSlab::empty(x.rows_of(r), off[c * p]..off[(c + 1) * p]),
                output: DMatrix::zeros(n_rows, counts[rank]),
            }
        })
        .collect();

    let mut h = Harness::new(execution);
    let send_to = |rank: usize, st: &Backward, dc: usize| -> Option<Message> {
        let (r, c) = grid.coords(rank);
        let group = off[dc * p]..off[(dc + 1) * p];
        let mut m = Message::new(rank, grid.rank(r, dc), PHASE_ROWS);
        for rows in row_blocks(n_rows, nb, r, p) {
            for cols in col_runs(group.clone(), nb, c, q) {
                m.push_block(rows.clone(), cols, |i, j| {
                    st.tile[(global_to_local(i, nb, p).1, global_to_local(j, nb, q).1)]
                });
            }
        }
        (!m.blocks.is_empty()).then_some(m)
    };
    let place = |_: usize, st: &mut Backward, msgs: Vec<Message>| {
        for m in msgs {
            m.for_each(|i, j, v| {
                let li = global_to_local(i, nb, p).1;
                st.slab.data[(li, j - st.slab.cols.start)] = v;
            });
        }
    };
    row_phase(&mut h, &mut states, grid, send_to, place)?;

    h.exchange(
        PHASE_COLUMNS,
        &mut states,
        |s, d| grid.coords(s).1 == grid.coords(d).1,
        |rank, st| {
            let (r, c) = grid.coords(rank);
            grid.col_group(c)
                .into_iter()
                .filter_map(|owner| {
                    let cols = off[owner]..off[owner + 1];
                    let mut m = Message::new(rank, owner, PHASE_COLUMNS);
                    if !cols.is_empty() {
                        for rows in row_blocks(n_rows, nb, r, p) {
                            m.push_block(rows, cols.clone(), |i, j| {
                                st.slab.data[(global_to_local(i, nb, p).1, j - st.slab.cols.start)]
                            });
                        }
                    }
                    (!m.blocks.is_empty()).then_some(m)
                })
                .collect()
        },
        |rank, st, msgs| {
            let start = off[rank];
            for m in msgs {
                m.for_each(|i, j, v| st.output[(i, j - start)] = v);
            }
        },
    )?;

    let layout = Irregular1DLayout {
        n_rows,
        counts: counts.to_vec(),
        locals: states.into_iter().map(|s| s.output).collect(),
    };
    Ok((layout, h.finish()))
}

struct Naive {
    input: DMatrix<C64>,
    full: DMatrix<C64>,
    tile: DMatrix<C64>,
}

/// Reference redistribution: gather every column on rank 0, then scatter
/// the block-cyclic tiles from there.
pub fn naive_redistribute(
    x: &Irregular1DLayout,
    grid: ProcessGrid,
    nb: usize,
) -> Result<(BlockCyclicLayout, TrafficReport)> {
    check_1d(&x.counts, grid, nb)?;
    let mut target = BlockCyclicLayout::zeros(x.n_rows, x.total(), nb, nb, grid)?;
    let off = offsets(&x.counts);
    let n_rows = x.n_rows;
    let n_cols = x.total();
    let mut states: Vec<Naive> = (0..grid.size())
        .map(|rank| Naive {
            input: x.locals[rank].clone(),
            full: if rank == 0 {
                DMatrix::zeros(n_rows, n_cols)
            } else {
                DMatrix::zeros(0, 0)
            },
            tile: target.tiles[rank].clone(),
        })
        .collect();
    let mut h = Harness::new(Execution::Sequential);
    h.exchange(
        PHASE_GATHER,
        &mut states,
        |_, d| d == 0,
        |rank, st| {
            let cols = off[rank]..off[rank + 1];
            if cols.is_empty() || n_rows == 0 {
                return Vec::new();
            }
            let mut m = Message::new(rank, 0, PHASE_GATHER);
            m.push_block(0..n_rows, cols.clone(), |i, j| {
                st.input[(i, j - cols.start)]
            });
            vec![m]
        },
        |_, st, msgs| {
            for m in msgs {
                m.for_each(|i, j, v| st.full[(i, j)] = v);
            }
        },
    )?;
    let (p, q) = (grid.p, grid.q);
    h.exchange(
        PHASE_SCATTER,
        &mut states,
        |s, _| s == 0,
        |rank, st| {
            if rank != 0 {
                return Vec::new();
            }
            (0..grid.size())
                .filter_map(|dst| {
                    let (r, c) = grid.coords(dst);
                    let mut m = Message::new(0, dst, PHASE_SCATTER);
                    for rows in row_blocks(n_rows, nb, r, p) {
                        for cols in col_runs(0..n_cols, nb, c, q) {
                            m.push_block(rows.clone(), cols, |i, j| st.full[(i, j)]);
                        }
                    }
                    (!m.blocks.is_empty()).then_some(m)
                })
                .collect()
        },
        |_, st, msgs| {
            for m in msgs {
                m.for_each(|i, j, v| {
                    st.tile[(global_to_local(i, nb, p).1, global_to_local(j, nb, q).1)] = v;
                });
            }
        },
    )?;
    for (tile, st) in target.tiles.iter_mut().zip(states) {
        *tile = st.tile;
    }
    Ok((target, h.finish()))
}
