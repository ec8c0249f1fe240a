// SPDX-License-Identifier: Apache-2.0

//! Matrix ingestion: Matrix Market (coordinate and array, real/integer and
//! complex, general/symmetric/hermitian) and a little-endian raw binary
//! format.
//!
//! Raw binary layout:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 8    | magic `BSLCMAT1`                         |
//! | 8      | 8    | rows, u64                                |
//! | 16     | 8    | cols, u64                                |
//! | 24     | 4    | 0 = real (f64), 1 = complex (f64 re, im) |
//! | 28     | 4    | reserved, zero                           |
//! | 32     | ...  | entries, column-major                    |

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::DenseHermitian;
use crate::error::{Error, Result};
use crate::C64;

pub const RAW_MAGIC: &[u8; 8] = b"BSLCMAT1";
const RAW_HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    RawBinary,
}

impl MatrixFormat {
    /// `.mtx` (and `.mm`) is Matrix Market, anything else raw binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") | Some("mm") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::RawBinary,
        }
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DenseHermitian> {
    match format {
        MatrixFormat::MatrixMarket => {
            let f = fs::File::open(path)?;
            read_matrix_market(BufReader::new(f))
        }
        MatrixFormat::RawBinary => {
            let m = read_raw(path)?;
            if m.nrows() != m.ncols() {
                return Err(Error::NotSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            DenseHermitian::new(m)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseHermitian> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('%')
        }
        Err(_) => true,
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(1, "missing size line"))?;
    let size = size?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(size_line, format!("bad integer '{t}'")))
        })
        .collect::<Result<_>>()?;
    let (rows, cols) = match (coordinate, dims.as_slice()) {
        (true, [r, c, _]) | (false, [r, c]) => (*r, *c),
        _ => return Err(parse_err(size_line, "malformed size line")),
    };
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Err(parse_err(size_line, "matrix dimension must be >= 1"));
    }
    let mut a = DMatrix::<C64>::zeros(n, n);
    let values_per_entry = if field == Field::Complex { 2 } else { 1 };

    let parse_value = |line: usize, toks: &[&str]| -> Result<C64> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad number '{t}'")))
        };
        Ok(match field {
            Field::Real => C64::new(num(toks[0])?, 0.0),
            Field::Complex => C64::new(num(toks[0])?, num(toks[1])?),
        })
    };
    let place = |line: usize, i: usize, j: usize, v: C64, a: &mut DMatrix<C64>| -> Result<()> {
        if i >= n || j >= n {
            return Err(parse_err(
                line,
                format!("index ({}, {}) out of range", i + 1, j + 1),
            ));
        }
        a[(i, j)] += v;
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => a[(j, i)] += v,
                Symmetry::Hermitian => a[(j, i)] += v.conj(),
            }
        }
        Ok(())
    };

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (ln, l) in body {
            let l = l?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 + values_per_entry {
                return Err(parse_err(ln, "wrong number of fields in entry"));
            }
            let idx = |t: &str| {
                t.parse::<usize>()
                    .ok()
                    .filter(|&x| x >= 1)
                    .ok_or_else(|| parse_err(ln, format!("bad index '{t}'")))
            };
            let (i, j) = (idx(toks[0])? - 1, idx(toks[1])? - 1);
            let v = parse_value(ln, &toks[2..])?;
            place(ln, i, j, v, &mut a)?;
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(
                size_line,
                format!("expected {nnz} entries, found {seen}"),
            ));
        }
    } else {
        // column-major; symmetric variants list only the lower triangle
        let positions: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| {
                let start = if symmetry == Symmetry::General { 0 } else { j };
                (start..n).map(move |i| (i, j))
            })
            .collect();
        let mut it = positions.into_iter();
        for (ln, l) in body {
            let l = l?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != values_per_entry {
                return Err(parse_err(ln, "wrong number of fields in entry"));
            }
            let (i, j) = it.next().ok_or_else(|| parse_err(ln, "too many entries"))?;
            let v = parse_value(ln, &toks)?;
            place(ln, i, j, v, &mut a)?;
        }
        if it.next().is_some() {
            return Err(parse_err(size_line, "too few entries"));
        }
    }
    DenseHermitian::new(a)
}

/// Writes the lower triangle in coordinate format (`symmetric` for real
/// matrices, `hermitian` otherwise). Values are printed with round-trip
/// precision.
pub fn write_matrix_market(path: &Path, a: &DenseHermitian) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    let n = a.n();
    let entries: Vec<(usize, usize, C64)> = (0..n)
        .flat_map(|j| (j..n).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, a.get(i, j)))
        .filter(|&(i, j, v)| i == j || v != C64::new(0.0, 0.0))
        .collect();
    if a.is_real() {
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    } else {
        writeln!(out, "%%MatrixMarket matrix coordinate complex hermitian")?;
    }
    writeln!(out, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        if a.is_real() {
            writeln!(out, "{} {} {:e}", i + 1, j + 1, v.re)?;
        } else {
            writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_raw(path: &Path, m: &DMatrix<C64>, real: bool) -> Result<()> {
    let mut buf = Vec::with_capacity(RAW_HEADER_LEN + m.len() * if real { 8 } else { 16 });
    buf.extend_from_slice(RAW_MAGIC);
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    buf.extend_from_slice(&(u32::from(!real)).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for z in m.iter() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        if !real {
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<DMatrix<C64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_raw(&bytes)
}

pub fn decode_raw(bytes: &[u8]) -> Result<DMatrix<C64>> {
    let bad = |m: &str| parse_err(0, m.to_string());
    if bytes.len() < RAW_HEADER_LEN || &bytes[..8] != RAW_MAGIC {
        return Err(bad("not a raw matrix file (bad magic)"));
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
    let rows = u64_at(8);
    let cols = u64_at(16);
    let flag = u32::from_le_bytes(bytes[24..28].try_into().unwrap());
    let width = match flag {
        0 => 8,
        1 => 16,
        _ => return Err(bad("unknown real/complex flag")),
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(width))
        .ok_or_else(|| bad("dimensions overflow"))?;
    let body = &bytes[RAW_HEADER_LEN..];
    if body.len() != expected {
        return Err(bad("payload length does not match header"));
    }
    let f = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().unwrap());
    let data: Vec<C64> = (0..rows * cols)
        .map(|k| {
            let o = k * width;
            if width == 8 {
                C64::new(f(o), 0.0)
            } else {
                C64::new(f(o), f(o + 8))
            }
        })
        .collect();
    Ok(DMatrix::from_vec(rows, cols, data))
}
