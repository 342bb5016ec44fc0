//! Matrix Market coordinate-format reader and writer.
//!
//! Accepted: `matrix coordinate {real|integer|pattern} {general|symmetric}`.
//! Symmetric storage is expanded, duplicates are summed and pattern entries
//! read as 1.0. Indices in the file are 1-based.

use std::io::{BufRead, Write};

use super::CsrMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(line_no, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(line_no, format!("unsupported object '{}'", tokens[1])));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(line_no, format!("unsupported format '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(line_no, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(line_no, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

fn parse_index(line_no: usize, tok: Option<&str>, bound: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line_no, format!("missing {what} index")))?;
    let idx: usize = tok
        .parse()
        .map_err(|_| parse_err(line_no, format!("bad {what} index '{tok}'")))?;
    if idx == 0 || idx > bound {
        return Err(parse_err(
            line_no,
            format!("{what} index {idx} out of bounds 1..={bound}"),
        ));
    }
    Ok(idx - 1)
}

/// Reads a Matrix Market coordinate file into canonical CSR.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (field, symmetry) = match lines.next() {
        Some((n, line)) => parse_header(n, &line?)?,
        None => return Err(parse_err(1, "empty input")),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut entries = 0usize;
    let mut last_line = 1;
    for (n, line) in lines {
        let line = line?;
        last_line = n;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let Some((nrows, ncols, nnz)) = size else {
            let mut dim = |what| -> Result<usize> {
                let t = toks
                    .next()
                    .ok_or_else(|| parse_err(n, format!("size line is missing {what}")))?;
                t.parse().map_err(|_| parse_err(n, format!("bad {what} '{t}'")))
            };
            let s = (dim("rows")?, dim("columns")?, dim("entry count")?);
            if toks.next().is_some() {
                return Err(parse_err(n, "trailing tokens on size line"));
            }
            triplets.reserve(s.2.min(1 << 24));
            size = Some(s);
            continue;
        };
        if entries == nnz {
            return Err(parse_err(n, format!("more than the declared {nnz} entries")));
        }
        let i = parse_index(n, toks.next(), nrows, "row")?;
        let j = parse_index(n, toks.next(), ncols, "column")?;
        let v = match field {
            Field::Pattern => 1.0,
            Field::Integer => {
                let t = toks.next().ok_or_else(|| parse_err(n, "missing value"))?;
                t.parse::<i64>()
                    .map_err(|_| parse_err(n, format!("bad integer value '{t}'")))? as f64
            }
            Field::Real => {
                let t = toks.next().ok_or_else(|| parse_err(n, "missing value"))?;
                t.parse::<f64>()
                    .map_err(|_| parse_err(n, format!("bad real value '{t}'")))?
            }
        };
        if toks.next().is_some() {
            return Err(parse_err(n, "trailing tokens on entry line"));
        }
        entries += 1;
        triplets.push((i, j, v));
        if symmetry == Symmetry::Symmetric && i != j {
            triplets.push((j, i, v));
        }
    }

    let (nrows, ncols, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if entries != nnz {
        return Err(parse_err(
            last_line,
            format!("declared {nnz} entries but found {entries}"),
        ));
    }
    CsrMatrix::from_triplets(nrows, ncols, triplets)
}

/// Writes `m` as a general real coordinate file. Values use Rust's
/// shortest round-trip formatting, so reading the output back reproduces
/// the CSR arrays exactly.
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for i in 0..m.nrows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:?}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}
