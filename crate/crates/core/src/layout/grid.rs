// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// `p x q` process grid with column-major rank numbering:
/// `rank = row + col * p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProcessGrid {
    pub p: usize,
    pub q: usize,
}

impl ProcessGrid {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Layout(format!("grid {p}x{q} has no ranks")));
        }
        Ok(Self { p, q })
    }

    pub fn size(&self) -> usize {
        self.p * self.q
    }

    pub fn coords(&self, rank: usize) -> (usize, usize) {
        (rank % self.p, rank / self.p)
    }

    pub fn rank(&self, row: usize, col: usize) -> usize {
        row + col * self.p
    }

    /// Ranks in grid row `row`, ordered by column.
    pub fn row_group(&self, row: usize) -> Vec<usize> {
        (0..self.q).map(|c| self.rank(row, c)).collect()
    }

    /// Ranks in grid column `col`, ordered by row.
    pub fn col_group(&self, col: usize) -> Vec<usize> {
        (0..self.p).map(|r| self.rank(r, col)).collect()
    }
}

/// Number of rows (or columns) of an `n`-long dimension split in blocks of
/// `nb` that land on process coordinate `iproc` out of `nprocs`.
pub fn numroc(n: usize, nb: usize, iproc: usize, nprocs: usize) -> usize {
    let nblocks = n / nb;
    let mut count = (nblocks / nprocs) * nb;
    let extra = nblocks % nprocs;
    if iproc < extra {
        count += nb;
    } else if iproc == extra {
        count += n % nb;
    }
    count
}

/// Global index to (process coordinate, local index) for one dimension.
pub fn global_to_local(g: usize, nb: usize, nprocs: usize) -> (usize, usize) {
    let block = g / nb;
    (block % nprocs, (block / nprocs) * nb + g % nb)
}

/// Local index on process coordinate `iproc` to global index.
pub fn local_to_global(l: usize, iproc: usize, nb: usize, nprocs: usize) -> usize {
    ((l / nb) * nprocs + iproc) * nb + l % nb
}

/// Dense matrix in 2D block-cyclic distribution: block `(I, J)` of size
/// `mb x nb` lives on grid position `(I mod p, J mod q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCyclicLayout {
    pub n_rows: usize,
    pub n_cols: usize,
    pub mb: usize,
    pub nb: usize,
    pub grid: ProcessGrid,
    /// Local tile of each rank, column-major.
    pub tiles: Vec<DMatrix<C64>>,
}

impl BlockCyclicLayout {
    pub fn zeros(
        n_rows: usize,
        n_cols: usize,
        mb: usize,
        nb: usize,
        grid: ProcessGrid,
    ) -> Result<Self> {
        if mb == 0 || nb == 0 {
            return Err(Error::Layout("block sizes must be positive".into()));
        }
        let tiles = (0..grid.size())
            .map(|rank| {
                let (r, c) = grid.coords(rank);
                DMatrix::zeros(numroc(n_rows, mb, r, grid.p), numroc(n_cols, nb, c, grid.q))
            })
            .collect();
        Ok(Self {
            n_rows,
            n_cols,
            mb,
            nb,
            grid,
            tiles,
        })
    }

    pub fn distribute(a: &DMatrix<C64>, mb: usize, nb: usize, grid: ProcessGrid) -> Result<Self> {
        let mut out = Self::zeros(a.nrows(), a.ncols(), mb, nb, grid)?;
        for rank in 0..grid.size() {
            let (r, c) = grid.coords(rank);
            let tile = &mut out.tiles[rank];
            for lj in 0..tile.ncols() {
                let j = local_to_global(lj, c, nb, grid.q);
                for li in 0..tile.nrows() {
                    tile[(li, lj)] = a[(local_to_global(li, r, mb, grid.p), j)];
                }
            }
        }
        Ok(out)
    }

    /// `(rank, local row, local col)` of global entry `(i, j)`.
    pub fn locate(&self, i: usize, j: usize) -> (usize, usize, usize) {
        let (r, li) = global_to_local(i, self.mb, self.grid.p);
        let (c, lj) = global_to_local(j, self.nb, self.grid.q);
        (self.grid.rank(r, c), li, lj)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (rank, li, lj) = self.locate(i, j);
        self.tiles[rank][(li, lj)]
    }

    pub fn gather(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.n_rows, self.n_cols, |i, j| self.get(i, j))
    }

    /// Global row indices held by grid row `r`, ascending.
    pub fn rows_of(&self, r: usize) -> Vec<usize> {
        let len = numroc(self.n_rows, self.mb, r, self.grid.p);
        (0..len)
            .map(|l| local_to_global(l, r, self.mb, self.grid.p))
            .collect()
    }

    /// Global column indices held by grid column `c`, ascending.
    pub fn cols_of(&self, c: usize) -> Vec<usize> {
        let len = numroc(self.n_cols, self.nb, c, self.grid.q);
        (0..len)
            .map(|l| local_to_global(l, c, self.nb, self.grid.q))
            .collect()
    }
}

/// Columns of an `n_rows`-tall matrix split into contiguous, possibly empty,
/// per-rank groups. Rank `i` holds global columns
/// `offset(i)..offset(i) + counts[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Irregular1DLayout {
    pub n_rows: usize,
    pub counts: Vec<usize>,
    pub locals: Vec<DMatrix<C64>>,
}

impl Irregular1DLayout {
    pub fn from_matrix(a: &DMatrix<C64>, counts: &[usize]) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total != a.ncols() {
            return Err(Error::Layout(format!(
                "counts sum to {total} but the matrix has {} columns",
                a.ncols()
            )));
        }
        let mut locals = Vec::with_capacity(counts.len());
        let mut off = 0;
        for &m in counts {
            locals.push(a.columns(off, m).into_owned());
            off += m;
        }
        Ok(Self {
            n_rows: a.nrows(),
            counts: counts.to_vec(),
            locals,
        })
    }

    pub fn ranks(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.counts)
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let mut a = DMatrix::zeros(self.n_rows, self.total());
        let mut off = 0;
        for l in &self.locals {
            a.columns_mut(off, l.ncols()).copy_from(l);
            off += l.ncols();
        }
        a
    }
}

/// Exclusive prefix sums of `counts`, with the total appended.
pub fn offsets(counts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len() + 1);
    let mut s = 0;
    out.push(0);
    for &c in counts {
        s += c;
        out.push(s);
    }
    out
}
