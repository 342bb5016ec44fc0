use super::{Exchange, Message};
use crate::{
    par,
    sparse::{CsrMatrix, Partition},
    stats::{MessageStats, Phase},
    topology::Topology,
    Result,
};

/// Reference SpMV pattern: rank `r` sends `v[j]` to every other rank `t`
/// that stores a non-zero in column `j`, for each `j` that `r` owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardPattern {
    pub exchange: Exchange,
}

impl StandardPattern {
    /// Ranks `r` sends to.
    pub fn destinations(&self, r: usize) -> Vec<usize> {
        self.exchange.peers(r)
    }

    /// Global indices `r` sends to `t`; empty when they do not communicate.
    pub fn indices(&self, r: usize, t: usize) -> &[usize] {
        self.exchange.indices(r, t).unwrap_or(&[])
    }

    pub fn sends(&self, r: usize) -> &[Message] {
        &self.exchange.sends[r]
    }

    pub fn recvs(&self, r: usize) -> &[Message] {
        &self.exchange.recvs[r]
    }
}

pub fn build_standard_pattern(
    a: &CsrMatrix,
    part: &Partition,
    topo: &Topology,
) -> Result<StandardPattern> {
    let demands = par::map_range(topo.num_procs(), |t| {
        let mut out = Vec::new();
        for &i in part.rows_of(t) {
            for &j in a.row_cols(i) {
                let r = part.owner(j);
                if r != t {
                    out.push((r, j));
                }
            }
        }
        out
    });
    Ok(StandardPattern {
        exchange: Exchange::from_demands(topo.num_procs(), demands)?,
    })
}

/// One record per message of the pattern, classed by node membership.
pub fn standard_message_stats(pat: &StandardPattern, topo: &Topology) -> MessageStats {
    let mut stats = MessageStats::new(topo.num_procs());
    for (src, list) in pat.exchange.sends.iter().enumerate() {
        for m in list {
            stats.record(topo, Phase::Standard, src, m.peer, m.indices.len());
        }
    }
    stats
}
