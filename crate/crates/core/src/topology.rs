//! Cluster shape and the rank <-> (local process, node) bijection.
//!
//! Ranks are laid out SMP-style: the first `ppn` ranks live on node 0, the
//! next `ppn` on node 1, and so on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A cluster of `num_nodes` full nodes with `ppn` processes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    num_procs: usize,
    ppn: usize,
    num_nodes: usize,
}

/// A rank expressed as (local process id on its node, node id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RankTuple {
    pub local_proc: usize,
    pub node: usize,
}

impl RankTuple {
    pub fn new(local_proc: usize, node: usize) -> Self {
        RankTuple { local_proc, node }
    }
}

impl std::fmt::Display for RankTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.local_proc, self.node)
    }
}

impl Topology {
    pub fn new(num_nodes: usize, ppn: usize) -> Result<Self> {
        if num_nodes == 0 || ppn == 0 {
            return Err(Error::argument(format!(
                "topology needs at least one node and one process per node, got {num_nodes}x{ppn}"
            )));
        }
        let num_procs = num_nodes
            .checked_mul(ppn)
            .ok_or_else(|| Error::argument("process count overflows"))?;
        Ok(Topology {
            num_procs,
            ppn,
            num_nodes,
        })
    }

    /// Builds a topology from a process count, rejecting partial nodes.
    pub fn from_procs(num_procs: usize, ppn: usize) -> Result<Self> {
        if ppn == 0 || !num_procs.is_multiple_of(ppn) {
            return Err(Error::argument(format!(
                "{num_procs} processes do not fill whole nodes of {ppn}"
            )));
        }
        Topology::new(num_procs / ppn, ppn)
    }

    pub fn num_procs(&self) -> usize {
        self.num_procs
    }

    pub fn ppn(&self) -> usize {
        self.ppn
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn rank_to_tuple(&self, rank: usize) -> Result<RankTuple> {
        if rank >= self.num_procs {
            return Err(Error::RankOutOfRange {
                rank,
                num_procs: self.num_procs,
            });
        }
        Ok(RankTuple {
            local_proc: rank % self.ppn,
            node: rank / self.ppn,
        })
    }

    pub fn tuple_to_rank(&self, t: RankTuple) -> Result<usize> {
        if t.local_proc >= self.ppn || t.node >= self.num_nodes {
            return Err(Error::TupleOutOfRange {
                local_proc: t.local_proc,
                node: t.node,
                ppn: self.ppn,
                num_nodes: self.num_nodes,
            });
        }
        Ok(t.node * self.ppn + t.local_proc)
    }

    /// Node hosting `rank`. The caller guarantees `rank < num_procs`.
    #[inline]
    pub fn node_of(&self, rank: usize) -> usize {
        debug_assert!(rank < self.num_procs);
        rank / self.ppn
    }

    #[inline]
    pub fn local_proc_of(&self, rank: usize) -> usize {
        rank % self.ppn
    }

    #[inline]
    pub fn same_node(&self, a: usize, b: usize) -> bool {
        self.node_of(a) == self.node_of(b)
    }

    /// Global ranks living on `node`.
    pub fn ranks_on_node(&self, node: usize) -> std::ops::Range<usize> {
        node * self.ppn..(node + 1) * self.ppn
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.num_nodes, self.ppn)
    }
}
