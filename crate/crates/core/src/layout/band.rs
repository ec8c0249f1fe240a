// SPDX-License-Identifier: Apache-2.0

use super::grid::{global_to_local, BlockCyclicLayout};
use super::harness::{Execution, Harness, Message, TrafficReport};
use super::redistribute::{PHASE_COLUMNS, PHASE_ROWS};
use crate::error::{Error, Result};
use crate::linalg::BandedHermitian;

struct Gather {
    band: BandedHermitian,
}

/// Lower band entries `(i, j)`, `j <= i <= j + bw`, of the given global
/// columns, split by `row_runs`, as one message.
#[allow(clippy::too_many_arguments)]
fn band_message(
    src: usize,
    dst: usize,
    phase: &str,
    cols: &[usize],
    n: usize,
    bw: usize,
    row_runs: impl Fn(usize, usize) -> Vec<std::ops::Range<usize>>,
    value: impl Fn(usize, usize) -> crate::C64,
) -> Option<Message> {
    let mut m = Message::new(src, dst, phase);
    for &j in cols {
        for rows in row_runs(j, (j + bw + 1).min(n)) {
            if !rows.is_empty() {
                m.push_block(rows, j..j + 1, &value);
            }
        }
    }
    (!m.blocks.is_empty()).then_some(m)
}

/// Every rank ends up with the full compact band of a Hermitian matrix held
/// in block-cyclic layout. Only the lower band travels. Phase one is an
/// all-to-all inside each grid column, phase two inside each grid row.
pub fn gather_band_to_compact(
    d: &BlockCyclicLayout,
    bw: usize,
    execution: Execution,
) -> Result<(Vec<BandedHermitian>, TrafficReport)> {
    let n = d.n_rows;
    if d.n_cols != n || n == 0 {
        return Err(Error::Layout(format!(
            "band gather needs a square matrix, got {}x{}",
            n, d.n_cols
        )));
    }
    if d.mb != d.nb {
        return Err(Error::Layout("square blocks required".into()));
    }
    if bw >= n {
        return Err(Error::InvalidBandwidth { bw, n });
    }
    let grid = d.grid;
    let (p, q, nb) = (grid.p, grid.q, d.nb);
    let mut states: Vec<Gather> = (0..grid.size())
        .map(|_| Gather {
            band: BandedHermitian::zeros(n, bw),
        })
        .collect();
    let store = |_: usize, st: &mut Gather, msgs: Vec<Message>| {
        for m in msgs {
            m.for_each(|i, j, v| st.band.set(i, j, v));
        }
    };

    let mut h = Harness::new(execution);
    h.exchange(
        PHASE_COLUMNS,
        &mut states,
        |s, t| grid.coords(s).1 == grid.coords(t).1,
        |rank, _| {
            let (r, c) = grid.coords(rank);
            let cols = d.cols_of(c);
            let tile = &d.tiles[rank];
            // rows of grid row r inside [lo, hi)
            let runs = |lo: usize, hi: usize| {
                let mut out = Vec::new();
                let mut b = lo / nb;
                while b * nb < hi {
                    if b % p == r {
                        out.push((b * nb).max(lo)..((b + 1) * nb).min(hi));
                    }
                    b += 1;
                }
                out
            };
            grid.col_group(c)
                .into_iter()
                .filter_map(|dst| {
                    band_message(rank, dst, PHASE_COLUMNS, &cols, n, bw, runs, |i, j| {
                        tile[(global_to_local(i, nb, p).1, global_to_local(j, nb, q).1)]
                    })
                })
                .collect()
        },
        store,
    )?;
    h.exchange(
        PHASE_ROWS,
        &mut states,
        |s, t| grid.coords(s).0 == grid.coords(t).0,
        |rank, st| {
            let (r, c) = grid.coords(rank);
            let cols = d.cols_of(c);
            grid.row_group(r)
                .into_iter()
                .filter(|&dst| dst != rank)
                .filter_map(|dst| {
                    band_message(
                        rank,
                        dst,
                        PHASE_ROWS,
                        &cols,
                        n,
                        bw,
                        |lo, hi| std::iter::once(lo..hi).collect(),
                        |i, j| st.band.get(i, j),
                    )
                })
                .collect()
        },
        store,
    )?;
    Ok((states.into_iter().map(|s| s.band).collect(), h.finish()))
}
