//! Deterministic in-process execution of the standard and node-aware SpMV.
//!
//! Each rank is a task stepped by a [`Schedule`]. A communication phase has
//! two halves: every rank posts its sends (recorded in [`MessageStats`]),
//! then the phase drains and each rank's inbox is checked against the
//! pattern it was compiled from. Nothing posted in one phase is visible in
//! another, and inbox contents never depend on the order ranks ran in.

pub use crate::par::Schedule;

use crate::{
    comm::{build_standard_pattern, Exchange, LocalPattern, NodeAwarePattern},
    par,
    sparse::{local_spmv, split_blocks, Block, CsrMatrix, LocalBlocks, Partition, SplitMode},
    stats::{MessageStats, Phase},
    topology::Topology,
    Error, Result,
};

/// Values received by one rank in one phase, ascending by global index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecvBuffer {
    entries: Vec<(usize, f64)>,
}

impl RecvBuffer {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn get(&self, j: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&j, |e| e.0)
            .ok()
            .map(|k| self.entries[k].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug)]
struct Envelope {
    src: usize,
    dst: usize,
    values: Vec<f64>,
}

/// Sends posted in one phase, not yet delivered.
#[derive(Debug)]
pub struct Posted<'a> {
    phase: Phase,
    exchange: &'a Exchange,
    outboxes: Vec<Vec<Envelope>>,
}

/// A simulated cluster: topology plus the rank schedule.
#[derive(Debug, Clone, Copy)]
pub struct SimCluster {
    pub topo: Topology,
    pub schedule: Schedule,
}

impl SimCluster {
    pub fn new(topo: Topology, schedule: Schedule) -> Self {
        SimCluster { topo, schedule }
    }

    pub fn for_each_rank<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        par::try_map_range_with(self.schedule, self.topo.num_procs(), f)
    }

    /// Every rank packs the payload of each message it sends in `exchange`.
    /// `value(rank, j)` reads global index `j` from the rank's own buffers.
    pub fn post<'a, F>(
        &self,
        phase: Phase,
        exchange: &'a Exchange,
        stats: &mut MessageStats,
        value: F,
    ) -> Result<Posted<'a>>
    where
        F: Fn(usize, usize) -> Option<f64> + Sync + Send,
    {
        if exchange.len() != self.topo.num_procs() {
            return Err(Error::Dimension {
                expected: self.topo.num_procs(),
                got: exchange.len(),
            });
        }
        let outboxes = self.for_each_rank(|src| {
            exchange.sends[src]
                .iter()
                .map(|m| {
                    let values = m
                        .indices
                        .iter()
                        .map(|&j| {
                            value(src, j).ok_or_else(|| {
                                Error::invariant(format!(
                                    "rank {src} has no value for index {j} in {phase:?}"
                                ))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(Envelope {
                        src,
                        dst: m.peer,
                        values,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for env in outboxes.iter().flatten() {
            stats.record(&self.topo, phase, env.src, env.dst, env.values.len());
        }
        Ok(Posted {
            phase,
            exchange,
            outboxes,
        })
    }
}

impl Posted<'_> {
    /// Delivers every envelope exactly once and returns each rank's inbox
    /// sorted by global index.
    pub fn wait(self) -> Result<Vec<RecvBuffer>> {
        let n = self.exchange.len();
        let mut inboxes: Vec<Vec<Envelope>> = (0..n).map(|_| Vec::new()).collect();
        for env in self.outboxes.into_iter().flatten() {
            inboxes[env.dst].push(env);
        }
        inboxes
            .into_iter()
            .enumerate()
            .map(|(dst, mut envs)| {
                envs.sort_by_key(|e| e.src);
                let expected = &self.exchange.recvs[dst];
                if envs.len() != expected.len() {
                    return Err(Error::invariant(format!(
                        "rank {dst} got {} messages in {:?}, expected {}",
                        envs.len(),
                        self.phase,
                        expected.len()
                    )));
                }
                let mut entries = Vec::with_capacity(expected.iter().map(|m| m.indices.len()).sum());
                for (env, m) in envs.iter().zip(expected) {
                    if env.src != m.peer || env.values.len() != m.indices.len() {
                        return Err(Error::invariant(format!(
                            "rank {dst} got an unexpected message from {} in {:?}",
                            env.src, self.phase
                        )));
                    }
                    entries.extend(m.indices.iter().copied().zip(env.values.iter().copied()));
                }
                entries.sort_by_key(|e| e.0);
                if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
                    return Err(Error::invariant(format!(
                        "rank {dst} received index {} twice in {:?}",
                        w[0].0, self.phase
                    )));
                }
                Ok(RecvBuffer { entries })
            })
            .collect()
    }
}

/// One intra-node step: every rank sends the indices the pattern assigns
/// it, reading values through `value(rank, j)`, and gets back what it was
/// due.
pub fn run_local_comm<F>(
    cluster: &SimCluster,
    pattern: &LocalPattern,
    stats: &mut MessageStats,
    value: F,
) -> Result<Vec<RecvBuffer>>
where
    F: Fn(usize, usize) -> Option<f64> + Sync + Send,
{
    cluster
        .post(pattern.locality.phase(), &pattern.exchange, stats, value)?
        .wait()
}

/// Relative tolerance, in the infinity norm, for agreement with the oracle.
pub const TOLERANCE: f64 = 1e-12;

/// Distance of a parallel result from the oracle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleCheck {
    pub max_abs_err: f64,
    /// `max_abs_err` over the oracle's infinity norm.
    pub max_rel_err: f64,
    pub verified: bool,
}

pub fn compare_to_oracle(got: &[f64], oracle: &[f64]) -> OracleCheck {
    let norm = oracle.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let max_abs_err = if got.len() == oracle.len() {
        got.iter()
            .zip(oracle)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    } else {
        f64::INFINITY
    };
    let max_rel_err = if norm > 0.0 {
        max_abs_err / norm
    } else if max_abs_err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    OracleCheck {
        max_abs_err,
        max_rel_err,
        verified: max_rel_err <= TOLERANCE,
    }
}

/// Exact serial product, the correctness oracle.
pub fn run_serial_spmv(a: &CsrMatrix, v: &[f64]) -> Result<Vec<f64>> {
    a.spmv(v)
}

fn check_inputs(a: &CsrMatrix, v: &[f64], part: &Partition, topo: &Topology) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::argument(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if v.len() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: v.len(),
        });
    }
    if part.num_rows() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: part.num_rows(),
        });
    }
    if part.num_ranks() != topo.num_procs() {
        return Err(Error::Dimension {
            expected: topo.num_procs(),
            got: part.num_ranks(),
        });
    }
    Ok(())
}

/// Lays out the values a block needs, in `col_map` order. `lookup` must
/// produce every column exactly once.
fn block_input(block: &Block, lookup: impl Fn(usize) -> Option<f64>, rank: usize) -> Result<Vec<f64>> {
    block
        .col_map
        .iter()
        .map(|&j| {
            lookup(j).ok_or_else(|| {
                Error::invariant(format!("rank {rank} never received column {j}"))
            })
        })
        .collect()
}

fn own_value<'a>(part: &'a Partition, local: &'a [Vec<f64>]) -> impl Fn(usize, usize) -> Option<f64> + Sync + Send + 'a {
    move |rank, j| (part.owner(j) == rank).then(|| local[rank][part.local_index(j)])
}

/// Reference algorithm: one direct message per communicating rank pair.
///
/// Returns the gathered product and the canonicalized message records.
pub fn run_standard_spmv(
    a: &CsrMatrix,
    v: &[f64],
    part: &Partition,
    topo: &Topology,
    schedule: Schedule,
) -> Result<(Vec<f64>, MessageStats)> {
    check_inputs(a, v, part, topo)?;
    let cluster = SimCluster::new(*topo, schedule);
    let pattern = build_standard_pattern(a, part, topo)?;
    let blocks: Vec<LocalBlocks> =
        cluster.for_each_rank(|r| Ok(split_blocks(a, part, topo, r, SplitMode::Standard)))?;
    let local = part.scatter(v);
    let mut stats = MessageStats::new(topo.num_procs());

    let posted = cluster.post(Phase::Standard, &pattern.exchange, &mut stats, own_value(part, &local))?;
    let mut y = cluster.for_each_rank(|r| {
        let mut y = vec![0.0; blocks[r].rows.len()];
        local_spmv(&blocks[r].on_process.matrix, &local[r], &mut y)?;
        Ok(y)
    })?;
    let inbox = posted.wait()?;

    y = cluster.for_each_rank(|r| {
        let off = blocks[r].off_process().expect("standard split");
        if inbox[r].len() != off.col_map.len() {
            return Err(Error::invariant(format!(
                "rank {r} received {} values for {} off-process columns",
                inbox[r].len(),
                off.col_map.len()
            )));
        }
        let x = block_input(off, |j| inbox[r].get(j), r)?;
        let mut yr = y[r].clone();
        local_spmv(&off.matrix, &x, &mut yr)?;
        Ok(yr)
    })?;

    stats.validate(topo)?;
    stats.canonicalize();
    Ok((part.gather(&y), stats))
}

/// Node-aware algorithm with the default node-to-process assignment.
pub fn run_napspmv(
    a: &CsrMatrix,
    v: &[f64],
    part: &Partition,
    topo: &Topology,
    schedule: Schedule,
) -> Result<(Vec<f64>, MessageStats)> {
    check_inputs(a, v, part, topo)?;
    let pattern = NodeAwarePattern::build(a, part, topo)?;
    run_napspmv_with_pattern(a, v, part, topo, &pattern, schedule)
}

/// Node-aware algorithm over a prebuilt pattern.
///
/// Phase order: fully-local exchange; initial on-node gather; inter-node
/// sends posted; on_process and on_node products; inter-node drain;
/// on-node distribution of received values; off_node product.
pub fn run_napspmv_with_pattern(
    a: &CsrMatrix,
    v: &[f64],
    part: &Partition,
    topo: &Topology,
    pattern: &NodeAwarePattern,
    schedule: Schedule,
) -> Result<(Vec<f64>, MessageStats)> {
    check_inputs(a, v, part, topo)?;
    let cluster = SimCluster::new(*topo, schedule);
    let blocks: Vec<LocalBlocks> =
        cluster.for_each_rank(|r| Ok(split_blocks(a, part, topo, r, SplitMode::NodeAware)))?;
    let local = part.scatter(v);
    let own = own_value(part, &local);
    let mut stats = MessageStats::new(topo.num_procs());

    let near = run_local_comm(&cluster, &pattern.fully_local, &mut stats, &own)?;
    let gathered = run_local_comm(&cluster, &pattern.initial, &mut stats, &own)?;

    // values a rank ships itself are copied, not messaged
    for r in 0..topo.num_procs() {
        let copied = pattern.inter.exchange.sends[r]
            .iter()
            .flat_map(|m| &m.indices)
            .filter(|&&j| part.owner(j) == r)
            .count();
        stats.record_copy(Phase::LocalInitial, r, copied);
    }
    let posted = cluster.post(Phase::InterNode, &pattern.inter.exchange, &mut stats, |r, j| {
        own(r, j).or_else(|| gathered[r].get(j))
    })?;

    let y = cluster.for_each_rank(|r| {
        let b = &blocks[r];
        let on_node = b.on_node().expect("node-aware split");
        if near[r].len() != on_node.col_map.len() {
            return Err(Error::invariant(format!(
                "rank {r} received {} values for {} on-node columns",
                near[r].len(),
                on_node.col_map.len()
            )));
        }
        let mut y = vec![0.0; b.rows.len()];
        local_spmv(&b.on_process.matrix, &local[r], &mut y)?;
        let x = block_input(on_node, |j| near[r].get(j), r)?;
        local_spmv(&on_node.matrix, &x, &mut y)?;
        Ok(y)
    })?;

    let arrived = posted.wait()?;
    let spread = run_local_comm(&cluster, &pattern.dist, &mut stats, |r, j| arrived[r].get(j))?;

    let y = cluster.for_each_rank(|r| {
        let off = blocks[r].off_node().expect("node-aware split");
        let x = block_input(
            off,
            |j| match (spread[r].get(j), arrived[r].get(j)) {
                (Some(x), None) | (None, Some(x)) => Some(x),
                _ => None,
            },
            r,
        )?;
        let self_used = off.col_map.iter().filter(|&&j| spread[r].get(j).is_none()).count();
        if off.col_map.len() - self_used != spread[r].len() {
            return Err(Error::invariant(format!(
                "rank {r} was sent off-node values it does not use"
            )));
        }
        let mut yr = y[r].clone();
        local_spmv(&off.matrix, &x, &mut yr)?;
        Ok((yr, self_used))
    })?;

    let mut pieces = Vec::with_capacity(y.len());
    for (r, (yr, self_used)) in y.into_iter().enumerate() {
        stats.record_copy(Phase::LocalDist, r, self_used);
        pieces.push(yr);
    }
    stats.validate(topo)?;
    stats.canonicalize();
    Ok((part.gather(&pieces), stats))
}
