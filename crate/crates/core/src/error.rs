// SPDX-License-Identifier: Apache-2.0

use std::io;

use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Count mismatch for one slice after recovery was exhausted.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDeficit {
    pub slice: usize,
    pub lower: f64,
    pub upper: f64,
    pub exact: usize,
    pub found: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("semibandwidth {bw} is invalid for dimension {n} (need 1 <= bw < n)")]
    InvalidBandwidth { bw: usize, n: usize },

    #[error("matrix is not Hermitian at ({row}, {col})")]
    NotHermitian { row: usize, col: usize },

    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("shifted matrix is singular at column {column} (shift {shift})")]
    SingularShift { column: usize, shift: Complex64 },

    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("quadrature needs an even node count >= 2, got {0}")]
    InvalidNodeCount(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("bound adjustment failed for the {which} bound after {attempts} attempts; fall back to the full interval")]
    BoundsExhausted {
        which: &'static str,
        attempts: usize,
    },

    #[error("{} slice(s) still deficient after recovery: {}", .0.len(), describe_deficits(.0))]
    Unrecovered(Vec<SliceDeficit>),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("{stage}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tags the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }
}

fn describe_deficits(d: &[SliceDeficit]) -> String {
    d.iter()
        .map(|s| {
            format!(
                "slice {} [{:.6e}, {:.6e}] exact {} found {}",
                s.slice, s.lower, s.upper, s.exact, s.found
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}
