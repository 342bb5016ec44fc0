use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Exchange, Message};
use crate::{
    par,
    sparse::{CsrMatrix, Partition},
    stats::{MessageStats, Phase},
    topology::Topology,
    Error, Result,
};

/// Node-level requirements: for each ordered node pair `(n, m)`, the
/// distinct global indices owned on `n` and used by some row on `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePattern {
    /// Participants are nodes, not ranks.
    pub exchange: Exchange,
}

impl NodePattern {
    pub fn num_nodes(&self) -> usize {
        self.exchange.len()
    }

    /// Nodes that `n` sends to, ascending.
    pub fn destinations(&self, n: usize) -> Vec<usize> {
        self.exchange.peers(n)
    }

    /// Nodes that send to `m`, ascending.
    pub fn sources(&self, m: usize) -> Vec<usize> {
        self.exchange.recvs[m].iter().map(|x| x.peer).collect()
    }

    /// Indices node `n` ships to node `m`; empty if none.
    pub fn indices(&self, n: usize, m: usize) -> &[usize] {
        self.exchange.indices(n, m).unwrap_or(&[])
    }

    /// Total values crossing the network.
    pub fn volume(&self) -> usize {
        self.exchange.value_count()
    }
}

pub fn build_node_pattern(a: &CsrMatrix, part: &Partition, topo: &Topology) -> Result<NodePattern> {
    let demands = par::map_range(topo.num_nodes(), |m| {
        let mut out = Vec::new();
        for s in topo.ranks_on_node(m) {
            for &i in part.rows_of(s) {
                for &j in a.row_cols(i) {
                    let n = topo.node_of(part.owner(j));
                    if n != m {
                        out.push((n, j));
                    }
                }
            }
        }
        out
    });
    Ok(NodePattern {
        exchange: Exchange::from_demands(topo.num_nodes(), demands)?,
    })
}

/// Which local process handles each node a node talks to.
///
/// `send_map[r]` lists the destination nodes rank `r` ships to and
/// `recv_map[r]` the source nodes it receives from; both ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeProcessMap {
    pub send_map: Vec<Vec<usize>>,
    pub recv_map: Vec<Vec<usize>>,
}

impl NodeProcessMap {
    pub fn from_lists(mut send_map: Vec<Vec<usize>>, mut recv_map: Vec<Vec<usize>>) -> Self {
        send_map.iter_mut().for_each(|l| l.sort_unstable());
        recv_map.iter_mut().for_each(|l| l.sort_unstable());
        NodeProcessMap { send_map, recv_map }
    }
}

/// Spreads each node's destination and source nodes over its processes.
///
/// Candidates are ordered by payload size (largest first, ties by node
/// id). Destinations go round-robin to local processes 0, 1, ..; sources
/// go round-robin to ppn-1, ppn-2, ... A node with fewer partners than
/// processes leaves the remaining processes idle.
pub fn assign_nodes_to_procs(np: &NodePattern, topo: &Topology) -> NodeProcessMap {
    let ppn = topo.ppn();
    let mut send_map = vec![Vec::new(); topo.num_procs()];
    let mut recv_map = vec![Vec::new(); topo.num_procs()];
    let ordered = |list: &[Message]| {
        let mut c: Vec<(usize, usize)> = list.iter().map(|m| (m.peer, m.indices.len())).collect();
        c.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        c
    };
    for n in 0..topo.num_nodes() {
        let base = n * ppn;
        for (k, (m, _)) in ordered(&np.exchange.sends[n]).into_iter().enumerate() {
            send_map[base + k % ppn].push(m);
        }
        for (k, (m, _)) in ordered(&np.exchange.recvs[n]).into_iter().enumerate() {
            recv_map[base + ppn - 1 - k % ppn].push(m);
        }
    }
    NodeProcessMap::from_lists(send_map, recv_map)
}

/// Rank-to-rank inter-node messages: one per communicating node pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterProcPattern {
    pub exchange: Exchange,
}

impl InterProcPattern {
    pub fn destinations(&self, r: usize) -> Vec<usize> {
        self.exchange.peers(r)
    }

    pub fn indices(&self, r: usize, q: usize) -> &[usize] {
        self.exchange.indices(r, q).unwrap_or(&[])
    }
}

/// Resolves every node pair `(n, m)` to the rank on `n` that sends it and
/// the rank on `m` that receives it; the payload is the node pair's index
/// list.
pub fn build_inter_proc_pattern(
    np: &NodePattern,
    map: &NodeProcessMap,
    topo: &Topology,
) -> Result<InterProcPattern> {
    let nprocs = topo.num_procs();
    if map.send_map.len() != nprocs || map.recv_map.len() != nprocs {
        return Err(Error::Dimension {
            expected: nprocs,
            got: map.send_map.len().min(map.recv_map.len()),
        });
    }
    let mut sender: HashMap<(usize, usize), usize> = HashMap::new();
    let mut receiver: HashMap<(usize, usize), usize> = HashMap::new();
    for r in 0..nprocs {
        let node = topo.node_of(r);
        for &m in &map.send_map[r] {
            if sender.insert((node, m), r).is_some() {
                return Err(Error::invariant(format!(
                    "node pair ({node}, {m}) has two senders"
                )));
            }
        }
        for &n in &map.recv_map[r] {
            if receiver.insert((n, node), r).is_some() {
                return Err(Error::invariant(format!(
                    "node pair ({n}, {node}) has two receivers"
                )));
            }
        }
    }
    let mut demands: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nprocs];
    let mut pairs = 0usize;
    for n in 0..np.num_nodes() {
        for msg in &np.exchange.sends[n] {
            let m = msg.peer;
            let s = *sender.get(&(n, m)).ok_or_else(|| {
                Error::invariant(format!("no process on node {n} sends to node {m}"))
            })?;
            let q = *receiver.get(&(n, m)).ok_or_else(|| {
                Error::invariant(format!("no process on node {m} receives from node {n}"))
            })?;
            demands[q].extend(msg.indices.iter().map(|&j| (s, j)));
            pairs += 1;
        }
    }
    if sender.len() != pairs || receiver.len() != pairs {
        return Err(Error::invariant(
            "process map names node pairs that do not communicate",
        ));
    }
    Ok(InterProcPattern {
        exchange: Exchange::from_demands(nprocs, demands)?,
    })
}

/// (origin of the data, final destination) for an intra-node step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locality {
    /// Owners hand values to the rank that ships them to another node.
    OnNodeToOffNode,
    /// Inter-node receivers hand values to the ranks that use them.
    OffNodeToOnNode,
    /// Owners send values straight to on-node users.
    OnNodeToOnNode,
}

impl Locality {
    pub const ALL: [Locality; 3] = [
        Locality::OnNodeToOffNode,
        Locality::OffNodeToOnNode,
        Locality::OnNodeToOnNode,
    ];

    pub fn phase(self) -> Phase {
        match self {
            Locality::OnNodeToOffNode => Phase::LocalInitial,
            Locality::OffNodeToOnNode => Phase::LocalDist,
            Locality::OnNodeToOnNode => Phase::FullyLocal,
        }
    }
}

/// Intra-node exchange for one locality tuple. Peers are global ranks that
/// always share the sender's node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalPattern {
    pub locality: Locality,
    pub exchange: Exchange,
}

impl LocalPattern {
    pub fn destinations(&self, r: usize) -> Vec<usize> {
        self.exchange.peers(r)
    }

    pub fn indices(&self, r: usize, s: usize) -> &[usize] {
        self.exchange.indices(r, s).unwrap_or(&[])
    }
}

pub fn build_local_pattern(
    a: &CsrMatrix,
    part: &Partition,
    topo: &Topology,
    ip: &InterProcPattern,
    locality: Locality,
) -> Result<LocalPattern> {
    let nprocs = topo.num_procs();
    let demands: Vec<Vec<(usize, usize)>> = match locality {
        Locality::OnNodeToOffNode => par::try_map_range_with(par::Schedule::Parallel, nprocs, |s| {
            let mut out = Vec::new();
            for msg in &ip.exchange.sends[s] {
                for &j in &msg.indices {
                    let p = part.owner(j);
                    if !topo.same_node(p, s) {
                        return Err(Error::invariant(format!(
                            "rank {s} ships index {j} it cannot gather on its node"
                        )));
                    }
                    if p != s {
                        out.push((p, j));
                    }
                }
            }
            Ok(out)
        })?,
        Locality::OffNodeToOnNode => {
            // index -> rank that receives it, per node
            let landing: Vec<HashMap<usize, usize>> =
                par::try_map_range_with(par::Schedule::Parallel, topo.num_nodes(), |m| {
                    let mut at = HashMap::new();
                    for q in topo.ranks_on_node(m) {
                        for msg in &ip.exchange.recvs[q] {
                            for &j in &msg.indices {
                                if at.insert(j, q).is_some() {
                                    return Err(Error::invariant(format!(
                                        "index {j} reaches node {m} twice"
                                    )));
                                }
                            }
                        }
                    }
                    Ok(at)
                })?;
            par::try_map_range_with(par::Schedule::Parallel, nprocs, |s| {
                let node = topo.node_of(s);
                let mut out = Vec::new();
                for &i in part.rows_of(s) {
                    for &j in a.row_cols(i) {
                        if topo.node_of(part.owner(j)) == node {
                            continue;
                        }
                        let q = *landing[node].get(&j).ok_or_else(|| {
                            Error::invariant(format!(
                                "off-node column {j} of rank {s} never reaches node {node}"
                            ))
                        })?;
                        if q != s {
                            out.push((q, j));
                        }
                    }
                }
                Ok::<_, Error>(out)
            })?
        }
        Locality::OnNodeToOnNode => par::map_range(nprocs, |s| {
            let mut out = Vec::new();
            for &i in part.rows_of(s) {
                for &j in a.row_cols(i) {
                    let p = part.owner(j);
                    if p != s && topo.same_node(p, s) {
                        out.push((p, j));
                    }
                }
            }
            out
        }),
    };
    Ok(LocalPattern {
        locality,
        exchange: Exchange::from_demands(nprocs, demands)?,
    })
}

/// Every piece of the node-aware pattern for one matrix and layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeAwarePattern {
    pub node: NodePattern,
    pub map: NodeProcessMap,
    pub inter: InterProcPattern,
    /// on_node -> off_node
    pub initial: LocalPattern,
    /// off_node -> on_node
    pub dist: LocalPattern,
    /// on_node -> on_node
    pub fully_local: LocalPattern,
}

impl NodeAwarePattern {
    pub fn build(a: &CsrMatrix, part: &Partition, topo: &Topology) -> Result<Self> {
        let node = build_node_pattern(a, part, topo)?;
        let map = assign_nodes_to_procs(&node, topo);
        Self::assemble(a, part, topo, node, map)
    }

    /// Like [`NodeAwarePattern::build`] with a caller-supplied process map.
    pub fn build_with_map(
        a: &CsrMatrix,
        part: &Partition,
        topo: &Topology,
        map: NodeProcessMap,
    ) -> Result<Self> {
        let node = build_node_pattern(a, part, topo)?;
        Self::assemble(a, part, topo, node, map)
    }

    fn assemble(
        a: &CsrMatrix,
        part: &Partition,
        topo: &Topology,
        node: NodePattern,
        map: NodeProcessMap,
    ) -> Result<Self> {
        let inter = build_inter_proc_pattern(&node, &map, topo)?;
        let initial = build_local_pattern(a, part, topo, &inter, Locality::OnNodeToOffNode)?;
        let dist = build_local_pattern(a, part, topo, &inter, Locality::OffNodeToOnNode)?;
        let fully_local = build_local_pattern(a, part, topo, &inter, Locality::OnNodeToOnNode)?;
        Ok(NodeAwarePattern {
            node,
            map,
            inter,
            initial,
            dist,
            fully_local,
        })
    }

    pub fn local(&self, locality: Locality) -> &LocalPattern {
        match locality {
            Locality::OnNodeToOffNode => &self.initial,
            Locality::OffNodeToOnNode => &self.dist,
            Locality::OnNodeToOnNode => &self.fully_local,
        }
    }
}

/// Records for every message of the four node-aware phases; fails if an
/// inter-node message stays on a node or a local one leaves it.
pub fn nap_message_stats(pat: &NodeAwarePattern, topo: &Topology) -> Result<MessageStats> {
    let mut stats = MessageStats::new(topo.num_procs());
    let phases = [
        (Phase::FullyLocal, &pat.fully_local.exchange),
        (Phase::LocalInitial, &pat.initial.exchange),
        (Phase::InterNode, &pat.inter.exchange),
        (Phase::LocalDist, &pat.dist.exchange),
    ];
    for (phase, ex) in phases {
        for (src, list) in ex.sends.iter().enumerate() {
            for m in list {
                stats.record(topo, phase, src, m.peer, m.indices.len());
            }
        }
    }
    stats.validate(topo)?;
    Ok(stats)
}
