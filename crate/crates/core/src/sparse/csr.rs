use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sparse matrix in canonical compressed-sparse-row form.
///
/// Canonical means: `row_offsets` starts at 0, ends at `nnz` and never
/// decreases; column ids within each row are strictly increasing and
/// below `ncols`. Explicitly stored zeros are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Wraps raw CSR arrays after checking the canonical-form invariants.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::Dimension {
                expected: nrows + 1,
                got: row_offsets.len(),
            });
        }
        if col_indices.len() != values.len() {
            return Err(Error::Dimension {
                expected: col_indices.len(),
                got: values.len(),
            });
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != col_indices.len() {
            return Err(Error::invariant("row offsets must span [0, nnz]"));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::invariant(format!("row offsets decrease at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invariant(format!(
                    "columns of row {i} are not strictly increasing"
                )));
            }
            if let Some(&c) = cols.last() {
                if c >= ncols {
                    return Err(Error::invariant(format!(
                        "column {c} in row {i} exceeds {ncols} columns"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a canonical matrix from (row, col, value) triplets, summing
    /// duplicates.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(Error::argument(format!(
                "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
        // stable: duplicates are summed in input order
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((i, j));
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column ids and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    #[inline]
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Serial `w = A v`, accumulating each row in ascending column order.
    /// This is the correctness oracle for the distributed algorithms.
    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.nrows];
        local_spmv(self, v, &mut w)?;
        Ok(w)
    }

    /// Same pattern with every value replaced by `f(value)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        CsrMatrix {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}

/// `y[i] += sum_j block[i, j] * x[j]`, rows in ascending order and terms in
/// stored column order.
pub fn local_spmv(block: &CsrMatrix, x: &[f64], y: &mut [f64]) -> Result<()> {
    if x.len() != block.ncols {
        return Err(Error::Dimension {
            expected: block.ncols,
            got: x.len(),
        });
    }
    if y.len() != block.nrows {
        return Err(Error::Dimension {
            expected: block.nrows,
            got: y.len(),
        });
    }
    for (i, yi) in y.iter_mut().enumerate() {
        let (cols, vals) = block.row(i);
        let mut acc = *yi;
        for (&j, &a) in cols.iter().zip(vals) {
            acc += a * x[j];
        }
        *yi = acc;
    }
    Ok(())
}
