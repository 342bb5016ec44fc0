use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::{topology::Topology, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Contiguous,
    Strided,
    Explicit,
}

impl std::fmt::Display for PartitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PartitionKind::Contiguous => "contiguous",
            PartitionKind::Strided => "strided",
            PartitionKind::Explicit => "explicit",
        })
    }
}

/// Row ownership: every global row belongs to exactly one rank.
///
/// Besides the row -> rank map this keeps, per rank, its rows in ascending
/// order, and for every row its position in that list (the local index of
/// the matching vector entry).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    kind: PartitionKind,
    owner: Vec<usize>,
    local_index: Vec<usize>,
    rows: Vec<Vec<usize>>,
}

impl Partition {
    /// Explicit assignment `owner[row] = rank`. Ranks may end up empty.
    pub fn explicit(owner: Vec<usize>, topo: &Topology) -> Result<Self> {
        Self::build(PartitionKind::Explicit, owner, topo.num_procs())
    }

    fn build(kind: PartitionKind, owner: Vec<usize>, num_procs: usize) -> Result<Self> {
        let mut rows = vec![Vec::new(); num_procs];
        let mut local_index = Vec::with_capacity(owner.len());
        for (row, &r) in owner.iter().enumerate() {
            let list = rows.get_mut(r).ok_or(Error::RankOutOfRange {
                rank: r,
                num_procs,
            })?;
            local_index.push(list.len());
            list.push(row);
        }
        Ok(Partition {
            kind,
            owner,
            local_index,
            rows,
        })
    }

    /// Balanced contiguous blocks; the first `n mod n_p` ranks take one
    /// extra row.
    pub fn contiguous(n: usize, topo: &Topology) -> Result<Self> {
        let np = topo.num_procs();
        check_enough_rows(n, np)?;
        let (base, extra) = (n / np, n % np);
        let mut owner = Vec::with_capacity(n);
        for r in 0..np {
            let size = base + usize::from(r < extra);
            owner.extend(std::iter::repeat_n(r, size));
        }
        Self::build(PartitionKind::Contiguous, owner, np)
    }

    /// Row `i` goes to rank `i mod n_p`.
    pub fn strided(n: usize, topo: &Topology) -> Result<Self> {
        let np = topo.num_procs();
        check_enough_rows(n, np)?;
        Self::build(PartitionKind::Strided, (0..n).map(|i| i % np).collect(), np)
    }

    /// Reads one base-10 rank per line, exactly `n` lines.
    pub fn from_reader<R: BufRead>(reader: R, n: usize, topo: &Topology) -> Result<Self> {
        let mut owner = Vec::with_capacity(n);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() && owner.len() == n {
                continue;
            }
            let r: usize = t.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad rank '{t}'"),
            })?;
            if r >= topo.num_procs() {
                return Err(Error::RankOutOfRange {
                    rank: r,
                    num_procs: topo.num_procs(),
                });
            }
            owner.push(r);
        }
        if owner.len() != n {
            return Err(Error::argument(format!(
                "partition file has {} ranks for {n} rows",
                owner.len()
            )));
        }
        Self::explicit(owner, topo)
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn num_rows(&self) -> usize {
        self.owner.len()
    }

    pub fn num_ranks(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn owner(&self, row: usize) -> usize {
        self.owner[row]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    /// Position of `row` within its owner's row list.
    #[inline]
    pub fn local_index(&self, row: usize) -> usize {
        self.local_index[row]
    }

    /// Rows owned by `rank`, ascending.
    pub fn rows_of(&self, rank: usize) -> &[usize] {
        &self.rows[rank]
    }

    /// Scatters a global vector into per-rank local pieces.
    pub fn scatter(&self, v: &[f64]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|rows| rows.iter().map(|&i| v[i]).collect())
            .collect()
    }

    /// Inverse of [`Partition::scatter`].
    pub fn gather(&self, pieces: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_rows()];
        for (rows, piece) in self.rows.iter().zip(pieces) {
            for (&i, &x) in rows.iter().zip(piece) {
                out[i] = x;
            }
        }
        out
    }
}

fn check_enough_rows(n: usize, np: usize) -> Result<()> {
    if n < np {
        return Err(Error::argument(format!(
            "{n} rows cannot be spread over {np} ranks without empty ranks"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn topo(np: usize) -> Topology {
        Topology::new(np, 1).unwrap()
    }

    fn sizes(p: &Partition) -> Vec<usize> {
        (0..p.num_ranks()).map(|r| p.rows_of(r).len()).collect()
    }

    #[test]
    fn contiguous_examples() {
        let p = Partition::contiguous(6, &Topology::new(3, 2).unwrap()).unwrap();
        assert!((0..6).all(|r| p.rows_of(r) == [r]));
        let p = Partition::contiguous(8, &topo(4)).unwrap();
        assert_eq!(p.rows_of(1), &[2, 3]);
        assert_eq!(p.rows_of(3), &[6, 7]);
        let p = Partition::contiguous(7, &topo(4)).unwrap();
        assert_eq!(sizes(&p), vec![2, 2, 2, 1]);
        assert!(Partition::contiguous(3, &topo(4)).is_err());
    }

    #[test]
    fn strided_examples() {
        let p = Partition::strided(6, &topo(3)).unwrap();
        assert_eq!(p.rows_of(0), &[0, 3]);
        assert_eq!(p.rows_of(1), &[1, 4]);
        assert_eq!(p.rows_of(2), &[2, 5]);
        assert_eq!(
            Partition::strided(5, &topo(5)).unwrap().owners(),
            Partition::contiguous(5, &topo(5)).unwrap().owners()
        );
        assert_eq!(sizes(&Partition::strided(7, &topo(3)).unwrap()), vec![3, 2, 2]);
        assert!(Partition::strided(2, &topo(3)).is_err());
    }

    #[test]
    fn file_examples() {
        let t2 = topo(2);
        let p = Partition::from_reader("0\n0\n1\n1\n".as_bytes(), 4, &t2).unwrap();
        assert_eq!(p.owners(), Partition::contiguous(4, &t2).unwrap().owners());
        assert_eq!(p.kind(), PartitionKind::Explicit);
        assert!(matches!(
            Partition::from_reader("0\n9\n1\n1\n".as_bytes(), 4, &topo(4)),
            Err(Error::RankOutOfRange { rank: 9, .. })
        ));
        assert!(Partition::from_reader("0\n1\n".as_bytes(), 4, &t2).is_err());
        assert!(Partition::from_reader("0\n1\n0\n1\n1\n".as_bytes(), 4, &t2).is_err());
        assert!(matches!(
            Partition::from_reader("0\nx\n".as_bytes(), 2, &t2),
            Err(Error::Parse { line: 2, .. })
        ));
        let ex = Topology::new(3, 2).unwrap();
        let p = Partition::from_reader("0\n1\n2\n3\n4\n5\n".as_bytes(), 6, &ex).unwrap();
        assert!((0..6).all(|r| p.rows_of(r) == [r]));
    }

    #[test]
    fn scatter_gather() {
        let p = Partition::strided(7, &topo(3)).unwrap();
        let v: Vec<f64> = (0..7).map(f64::from).collect();
        let pieces = p.scatter(&v);
        assert_eq!(pieces[1], vec![1.0, 4.0]);
        assert_eq!(p.gather(&pieces), v);
    }

    proptest! {
        #[test]
        fn contiguous_is_total_and_balanced(n in 1usize..2000, np in 1usize..64) {
            prop_assume!(n >= np);
            let p = Partition::contiguous(n, &topo(np)).unwrap();
            let s = sizes(&p);
            prop_assert_eq!(s.iter().sum::<usize>(), n);
            prop_assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
            for r in 0..np {
                let rows = p.rows_of(r);
                prop_assert!(rows.windows(2).all(|w| w[1] == w[0] + 1));
                for (k, &i) in rows.iter().enumerate() {
                    prop_assert_eq!(p.owner(i), r);
                    prop_assert_eq!(p.local_index(i), k);
                }
            }
        }

        #[test]
        fn strided_is_total(n in 1usize..2000, np in 1usize..64) {
            prop_assume!(n >= np);
            let p = Partition::strided(n, &topo(np)).unwrap();
            prop_assert_eq!(sizes(&p).iter().sum::<usize>(), n);
            prop_assert!((0..n).all(|i| p.owner(i) == i % np));
        }
    }
}
