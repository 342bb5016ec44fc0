//! Communication-pattern compilers for distributed SpMV.
//!
//! Every pattern is built from a global view of the matrix and partition,
//! and stored as an [`Exchange`]: per-rank send lists and their transpose.
//! Index lists hold global vector indices, ascending and deduplicated, and
//! a message payload follows list order.

mod dump;
mod node_aware;
mod standard;

use serde::{Deserialize, Serialize};

pub use dump::{DumpEntry, NodeAwareDump, PatternDump};
pub use node_aware::{
    assign_nodes_to_procs, build_inter_proc_pattern, build_local_pattern, build_node_pattern,
    nap_message_stats, InterProcPattern, LocalPattern, Locality, NodeAwarePattern, NodePattern,
    NodeProcessMap,
};
pub use standard::{build_standard_pattern, standard_message_stats, StandardPattern};

use crate::{Error, Result};

/// One side of a point-to-point message: the peer and the global indices
/// whose values travel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub peer: usize,
    pub indices: Vec<usize>,
}

/// Send lists and the matching receive lists for `n` participants.
///
/// `sends[a]` is sorted by destination and `recvs[b]` by source; `(a -> b,
/// idx)` appears in `sends[a]` iff `(b <- a, idx)` appears in `recvs[b]`.
/// No participant talks to itself and no index list is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Exchange {
    pub sends: Vec<Vec<Message>>,
    pub recvs: Vec<Vec<Message>>,
}

impl Exchange {
    /// Builds an exchange from per-destination `(source, index)` demands.
    /// Duplicated demands collapse into one index; self-demands are
    /// rejected.
    pub fn from_demands(n: usize, mut demands: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if demands.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: demands.len(),
            });
        }
        let mut recvs: Vec<Vec<Message>> = vec![Vec::new(); n];
        for (dst, list) in demands.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &(src, j) in list.iter() {
                if src == dst {
                    return Err(Error::invariant(format!("{dst} would message itself")));
                }
                if src >= n {
                    return Err(Error::RankOutOfRange {
                        rank: src,
                        num_procs: n,
                    });
                }
                match recvs[dst].last_mut() {
                    Some(m) if m.peer == src => m.indices.push(j),
                    _ => recvs[dst].push(Message {
                        peer: src,
                        indices: vec![j],
                    }),
                }
            }
        }
        let mut sends: Vec<Vec<Message>> = vec![Vec::new(); n];
        for (dst, list) in recvs.iter().enumerate() {
            for m in list {
                sends[m.peer].push(Message {
                    peer: dst,
                    indices: m.indices.clone(),
                });
            }
        }
        Ok(Exchange { sends, recvs })
    }

    pub fn len(&self) -> usize {
        self.sends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sends.iter().all(Vec::is_empty)
    }

    /// Index list sent from `src` to `dst`, if they communicate.
    pub fn indices(&self, src: usize, dst: usize) -> Option<&[usize]> {
        let list = self.sends.get(src)?;
        list.binary_search_by_key(&dst, |m| m.peer)
            .ok()
            .map(|k| list[k].indices.as_slice())
    }

    /// Destinations of `src`, ascending.
    pub fn peers(&self, src: usize) -> Vec<usize> {
        self.sends[src].iter().map(|m| m.peer).collect()
    }

    pub fn message_count(&self) -> usize {
        self.sends.iter().map(Vec::len).sum()
    }

    pub fn value_count(&self) -> usize {
        self.sends
            .iter()
            .flatten()
            .map(|m| m.indices.len())
            .sum()
    }

    /// Checks the structural guarantees listed on the type.
    pub fn validate(&self) -> Result<()> {
        let n = self.sends.len();
        if self.recvs.len() != n {
            return Err(Error::invariant("send and receive views disagree in size"));
        }
        let mut transposed: Vec<Vec<Message>> = vec![Vec::new(); n];
        for (src, list) in self.sends.iter().enumerate() {
            if list.windows(2).any(|w| w[0].peer >= w[1].peer) {
                return Err(Error::invariant(format!("sends of {src} not sorted by peer")));
            }
            for m in list {
                if m.peer == src || m.peer >= n {
                    return Err(Error::invariant(format!("bad destination {} from {src}", m.peer)));
                }
                if m.indices.is_empty() || m.indices.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invariant(format!(
                        "index list {src} -> {} is empty or unsorted",
                        m.peer
                    )));
                }
                transposed[m.peer].push(Message {
                    peer: src,
                    indices: m.indices.clone(),
                });
            }
        }
        if transposed != self.recvs {
            return Err(Error::invariant("receive lists are not the transpose of send lists"));
        }
        Ok(())
    }
}
