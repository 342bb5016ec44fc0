use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CsrMatrix;
use crate::{Error, Result};

/// Square `nrows x nrows` matrix with exactly `nnz_per_row` distinct
/// columns per row, drawn uniformly without replacement, and values
/// uniform in `[0, 1)`. The same arguments always produce the same matrix.
pub fn generate_random(nrows: usize, nnz_per_row: usize, seed: u64) -> Result<CsrMatrix> {
    if nnz_per_row > nrows {
        return Err(Error::argument(format!(
            "{nnz_per_row} non-zeros per row do not fit in {nrows} columns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nnz = nrows * nnz_per_row;
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    let mut row = Vec::with_capacity(nnz_per_row);
    for _ in 0..nrows {
        row.clear();
        row.extend(index::sample(&mut rng, nrows, nnz_per_row));
        row.sort_unstable();
        col_indices.extend_from_slice(&row);
        values.extend((0..nnz_per_row).map(|_| rng.gen::<f64>()));
    }
    let row_offsets = (0..=nrows).map(|i| i * nnz_per_row).collect();
    CsrMatrix::new(nrows, nrows, row_offsets, col_indices, values)
}

/// Vector of `n` values uniform in `[0, 1)`.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_per_row() {
        let m = generate_random(1000, 100, 1).unwrap();
        assert_eq!(m.nnz(), 100_000);
        assert!((0..1000).all(|i| m.row_cols(i).len() == 100));
        assert!(m.values().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn zero_per_row() {
        let m = generate_random(50, 0, 3).unwrap();
        assert_eq!(m.nnz(), 0);
        assert_eq!(m.spmv(&[1.0; 50]).unwrap(), vec![0.0; 50]);
    }

    #[test]
    fn deterministic() {
        let a = generate_random(300, 7, 42).unwrap();
        let b = generate_random(300, 7, 42).unwrap();
        assert_eq!(a.row_offsets(), b.row_offsets());
        assert_eq!(a.col_indices(), b.col_indices());
        let bits = |m: &CsrMatrix| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, generate_random(300, 7, 43).unwrap());
    }

    #[test]
    fn full_rows_and_too_dense() {
        let m = generate_random(5, 5, 0).unwrap();
        assert!((0..5).all(|i| m.row_cols(i) == [0, 1, 2, 3, 4]));
        assert!(generate_random(5, 6, 0).is_err());
    }

    #[test]
    fn vector_is_seeded() {
        assert_eq!(random_vector(50, 4), random_vector(50, 4));
        assert_ne!(random_vector(50, 4), random_vector(50, 5));
        assert!(random_vector(50, 4).iter().all(|x| (0.0..1.0).contains(x)));
    }
}
