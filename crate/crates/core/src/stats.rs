//! Message accounting shared by the pattern builders and the simulator.

use serde::{Deserialize, Serialize};

use crate::{topology::Topology, Error, Result};

/// Every communicated vector entry is a 64-bit float.
pub const BYTES_PER_VALUE: u64 = 8;

/// Communication step a message belongs to, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// The single point-to-point exchange of the reference algorithm.
    Standard,
    /// Node-aware: on-node values sent straight to the rank that uses them.
    FullyLocal,
    /// Node-aware: owners hand values to the rank that ships them off-node.
    LocalInitial,
    /// Node-aware: one message per communicating node pair.
    InterNode,
    /// Node-aware: received off-node values handed to the ranks that use them.
    LocalDist,
}

impl Phase {
    pub const NODE_AWARE: [Phase; 4] = [
        Phase::FullyLocal,
        Phase::LocalInitial,
        Phase::InterNode,
        Phase::LocalDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Standard => "standard",
            Phase::FullyLocal => "fully_local",
            Phase::LocalInitial => "local_initial",
            Phase::InterNode => "inter_node",
            Phase::LocalDist => "local_dist",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageClass {
    Intra,
    Inter,
}

impl MessageClass {
    pub fn between(topo: &Topology, src: usize, dst: usize) -> Self {
        if topo.same_node(src, dst) {
            MessageClass::Intra
        } else {
            MessageClass::Inter
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub phase: Phase,
    pub src: usize,
    pub dst: usize,
    pub value_count: u64,
    pub byte_count: u64,
    pub class: MessageClass,
}

/// Values a rank moved between its own buffers instead of messaging itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyRecord {
    pub phase: Phase,
    pub rank: usize,
    pub value_count: u64,
}

/// Aggregate over a subset of records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub messages: u64,
    pub values: u64,
    pub bytes: u64,
    /// Largest number of messages sent by one rank.
    pub max_msgs_sent: u64,
    /// Largest number of bytes sent by one rank.
    pub max_bytes_sent: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MessageStats {
    pub num_procs: usize,
    pub records: Vec<MessageRecord>,
    pub copies: Vec<CopyRecord>,
}

impl MessageStats {
    pub fn new(num_procs: usize) -> Self {
        MessageStats {
            num_procs,
            records: Vec::new(),
            copies: Vec::new(),
        }
    }

    pub fn record(&mut self, topo: &Topology, phase: Phase, src: usize, dst: usize, values: usize) {
        let value_count = values as u64;
        self.records.push(MessageRecord {
            phase,
            src,
            dst,
            value_count,
            byte_count: value_count * BYTES_PER_VALUE,
            class: MessageClass::between(topo, src, dst),
        });
    }

    pub fn record_copy(&mut self, phase: Phase, rank: usize, values: usize) {
        if values > 0 {
            self.copies.push(CopyRecord {
                phase,
                rank,
                value_count: values as u64,
            });
        }
    }

    pub fn extend(&mut self, other: MessageStats) {
        self.records.extend(other.records);
        self.copies.extend(other.copies);
    }

    /// Sorts records by (phase, src, dst) and copies by (phase, rank).
    pub fn canonicalize(&mut self) {
        self.records.sort_by_key(|r| (r.phase, r.src, r.dst));
        self.copies.sort_by_key(|c| (c.phase, c.rank));
    }

    pub fn summary(&self, filter: impl Fn(&MessageRecord) -> bool) -> Summary {
        let mut per_rank = vec![(0u64, 0u64); self.num_procs];
        let mut s = Summary::default();
        for r in self.records.iter().filter(|r| filter(r)) {
            s.messages += 1;
            s.values += r.value_count;
            s.bytes += r.byte_count;
            let slot = &mut per_rank[r.src];
            slot.0 += 1;
            slot.1 += r.byte_count;
        }
        s.max_msgs_sent = per_rank.iter().map(|x| x.0).max().unwrap_or(0);
        s.max_bytes_sent = per_rank.iter().map(|x| x.1).max().unwrap_or(0);
        s
    }

    pub fn class_summary(&self, class: MessageClass) -> Summary {
        self.summary(|r| r.class == class)
    }

    pub fn phase_summary(&self, phase: Phase, class: MessageClass) -> Summary {
        self.summary(|r| r.phase == phase && r.class == class)
    }

    /// Values that crossed the network.
    pub fn inter_node_values(&self) -> u64 {
        self.class_summary(MessageClass::Inter).values
    }

    pub fn copied_values(&self) -> u64 {
        self.copies.iter().map(|c| c.value_count).sum()
    }

    /// Checks byte counts, class labels and the phase/class pairing of the
    /// node-aware phases.
    pub fn validate(&self, topo: &Topology) -> Result<()> {
        for r in &self.records {
            if r.byte_count != r.value_count * BYTES_PER_VALUE {
                return Err(Error::invariant(format!("byte count mismatch in {r:?}")));
            }
            if r.src == r.dst {
                return Err(Error::invariant(format!("self message {r:?}")));
            }
            if r.class != MessageClass::between(topo, r.src, r.dst) {
                return Err(Error::invariant(format!("misclassified {r:?}")));
            }
            let expected = match r.phase {
                Phase::Standard => continue,
                Phase::InterNode => MessageClass::Inter,
                Phase::FullyLocal | Phase::LocalInitial | Phase::LocalDist => MessageClass::Intra,
            };
            if r.class != expected {
                return Err(Error::invariant(format!("{r:?} in the wrong phase")));
            }
        }
        Ok(())
    }
}
