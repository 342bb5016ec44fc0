use super::{CsrMatrix, Partition};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// on_process + one off_process block.
    Standard,
    /// on_process + on_node + off_node.
    NodeAware,
}

/// A rank-local sub-matrix whose columns index into a buffer described by
/// `col_map` (`col_map[k]` is the global column id stored at buffer slot
/// `k`). Rows follow the rank's row list.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub matrix: CsrMatrix,
    pub col_map: Vec<usize>,
}

impl Block {
    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RemoteBlocks {
    Standard { off_process: Block },
    NodeAware { on_node: Block, off_node: Block },
}

/// One rank's rows split by where their column values live.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBlocks {
    pub rank: usize,
    /// Global ids of the owned rows, ascending.
    pub rows: Vec<usize>,
    /// Columns owned by this rank; `col_map` equals `rows`.
    pub on_process: Block,
    pub remote: RemoteBlocks,
}

impl LocalBlocks {
    pub fn off_process(&self) -> Option<&Block> {
        match &self.remote {
            RemoteBlocks::Standard { off_process } => Some(off_process),
            RemoteBlocks::NodeAware { .. } => None,
        }
    }

    pub fn on_node(&self) -> Option<&Block> {
        match &self.remote {
            RemoteBlocks::NodeAware { on_node, .. } => Some(on_node),
            RemoteBlocks::Standard { .. } => None,
        }
    }

    pub fn off_node(&self) -> Option<&Block> {
        match &self.remote {
            RemoteBlocks::NodeAware { off_node, .. } => Some(off_node),
            RemoteBlocks::Standard { .. } => None,
        }
    }

    pub fn nnz(&self) -> usize {
        self.on_process.nnz()
            + match &self.remote {
                RemoteBlocks::Standard { off_process } => off_process.nnz(),
                RemoteBlocks::NodeAware { on_node, off_node } => on_node.nnz() + off_node.nnz(),
            }
    }
}

/// Row-major triplet accumulator for one block.
struct BlockBuilder {
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl BlockBuilder {
    fn new(nrows: usize) -> Self {
        let mut row_offsets = Vec::with_capacity(nrows + 1);
        row_offsets.push(0);
        BlockBuilder {
            row_offsets,
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    fn push(&mut self, col: usize, val: f64) {
        self.cols.push(col);
        self.vals.push(val);
    }

    fn end_row(&mut self) {
        self.row_offsets.push(self.cols.len());
    }

    /// Compresses global columns into a sorted column map.
    fn finish_remote(mut self) -> Block {
        let mut col_map = self.cols.clone();
        col_map.sort_unstable();
        col_map.dedup();
        for c in &mut self.cols {
            *c = col_map.binary_search(c).expect("column is in its own map");
        }
        self.finish(col_map)
    }

    fn finish(self, col_map: Vec<usize>) -> Block {
        let nrows = self.row_offsets.len() - 1;
        let matrix = CsrMatrix::new(nrows, col_map.len(), self.row_offsets, self.cols, self.vals)
            .expect("monotone re-indexing keeps canonical form");
        Block { matrix, col_map }
    }
}

/// Splits the rows owned by `rank` into on_process and remote blocks.
///
/// A stored entry `(i, j)` lands in on_process when `j` is owned by `rank`;
/// otherwise in on_node when the owner of `j` shares the node, else in
/// off_node (`SplitMode::Standard` keeps both in one off_process block).
/// Explicit zeros count as entries.
pub fn split_blocks(
    a: &CsrMatrix,
    part: &Partition,
    topo: &Topology,
    rank: usize,
    mode: SplitMode,
) -> LocalBlocks {
    let rows = part.rows_of(rank).to_vec();
    let node = topo.node_of(rank);
    let mut on_process = BlockBuilder::new(rows.len());
    let mut near = BlockBuilder::new(rows.len());
    let mut far = BlockBuilder::new(rows.len());
    for &i in &rows {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            let owner = part.owner(j);
            if owner == rank {
                on_process.push(part.local_index(j), v);
            } else if mode == SplitMode::NodeAware && topo.node_of(owner) == node {
                near.push(j, v);
            } else {
                far.push(j, v);
            }
        }
        on_process.end_row();
        near.end_row();
        far.end_row();
    }
    let on_process = on_process.finish(rows.clone());
    let remote = match mode {
        SplitMode::Standard => RemoteBlocks::Standard {
            off_process: far.finish_remote(),
        },
        SplitMode::NodeAware => RemoteBlocks::NodeAware {
            on_node: near.finish_remote(),
            off_node: far.finish_remote(),
        },
    };
    LocalBlocks {
        rank,
        rows,
        on_process,
        remote,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fixtures, sparse::generate_random};
    use std::collections::BTreeSet;

    /// Global (row, col) pairs stored in a block.
    fn entries(b: &Block, rows: &[usize]) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for (k, &i) in rows.iter().enumerate() {
            for &c in b.matrix.row_cols(k) {
                out.insert((i, b.col_map[c]));
            }
        }
        out
    }

    #[test]
    fn fixture_rank3() {
        let ex = fixtures::example1();
        let lb = split_blocks(&ex.matrix, &ex.partition, &ex.topology, 3, SplitMode::NodeAware);
        assert_eq!(entries(&lb.on_process, &lb.rows), BTreeSet::from([(3, 3)]));
        assert_eq!(entries(lb.on_node().unwrap(), &lb.rows), BTreeSet::from([(3, 2)]));
        assert_eq!(
            entries(lb.off_node().unwrap(), &lb.rows),
            BTreeSet::from([(3, 0), (3, 1)])
        );
        assert_eq!(lb.off_node().unwrap().col_map, vec![0, 1]);
        // values follow the entries
        assert_eq!(lb.on_node().unwrap().matrix.values(), &[10.0 * 3.0 + 2.0 + 1.0]);

        let std = split_blocks(&ex.matrix, &ex.partition, &ex.topology, 3, SplitMode::Standard);
        assert_eq!(std.off_process().unwrap().col_map, vec![0, 1, 2]);
    }

    #[test]
    fn diagonal_has_no_remote_entries() {
        let topo = Topology::new(2, 3).unwrap();
        let a = CsrMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        for part in [
            Partition::contiguous(7, &topo).unwrap(),
            Partition::strided(7, &topo).unwrap(),
        ] {
            for r in 0..topo.num_procs() {
                let lb = split_blocks(&a, &part, &topo, r, SplitMode::NodeAware);
                assert_eq!(lb.on_node().unwrap().nnz(), 0);
                assert_eq!(lb.off_node().unwrap().nnz(), 0);
                assert_eq!(lb.on_process.nnz(), part.rows_of(r).len());
            }
        }
    }

    #[test]
    fn single_node_has_no_off_node() {
        let topo = Topology::new(1, 4).unwrap();
        let a = generate_random(64, 8, 5).unwrap();
        let part = Partition::strided(64, &topo).unwrap();
        for r in 0..4 {
            let lb = split_blocks(&a, &part, &topo, r, SplitMode::NodeAware);
            assert_eq!(lb.off_node().unwrap().nnz(), 0);
            assert!(lb.on_node().unwrap().nnz() > 0);
        }
    }

    #[test]
    fn blocks_partition_nonzeros() {
        let topo = Topology::new(3, 4).unwrap();
        let a = generate_random(500, 11, 9).unwrap();
        let part = Partition::strided(500, &topo).unwrap();
        for r in 0..topo.num_procs() {
            let lb = split_blocks(&a, &part, &topo, r, SplitMode::NodeAware);
            let rows = &lb.rows;
            let on = entries(&lb.on_process, rows);
            let near = entries(lb.on_node().unwrap(), rows);
            let far = entries(lb.off_node().unwrap(), rows);
            let local_nnz: usize = rows.iter().map(|&i| a.row_cols(i).len()).sum();
            assert_eq!(on.len() + near.len() + far.len(), local_nnz);
            assert!(on.is_disjoint(&near) && on.is_disjoint(&far) && near.is_disjoint(&far));
            for &(_, j) in &on {
                assert_eq!(part.owner(j), r);
            }
            for &(_, j) in &near {
                assert!(part.owner(j) != r && topo.same_node(part.owner(j), r));
            }
            for &(_, j) in &far {
                assert!(!topo.same_node(part.owner(j), r));
            }
            for b in [lb.on_node().unwrap(), lb.off_node().unwrap()] {
                assert!(b.col_map.windows(2).all(|w| w[0] < w[1]));
                let distinct: BTreeSet<_> = entries(b, rows).into_iter().map(|(_, j)| j).collect();
                assert_eq!(distinct.into_iter().collect::<Vec<_>>(), b.col_map);
            }
            let std = split_blocks(&a, &part, &topo, r, SplitMode::Standard);
            let off = entries(std.off_process().unwrap(), rows);
            assert_eq!(off, near.union(&far).copied().collect());
        }
    }
}
