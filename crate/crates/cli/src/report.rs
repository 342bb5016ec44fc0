use serde::{Serialize, Serializer};

use napspmv::{
    cost::{model_stats, ModelParams, PhaseCost},
    sim::{compare_to_oracle, run_napspmv, run_serial_spmv, run_standard_spmv, Schedule},
    sparse::{random_vector, PartitionKind},
    stats::{MessageClass, Phase, Summary},
    MessageStats,
};

use crate::{source::Problem, CliError};

/// `standard / node_aware`, or `"inf"` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ratio(pub Option<f64>);

impl Ratio {
    pub fn of(num: f64, den: f64) -> Self {
        Ratio((den > 0.0).then(|| num / den))
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(x) => s.serialize_f64(x),
            None => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixInfo {
    pub source: String,
    pub n: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TopologyInfo {
    pub nodes: usize,
    pub ppn: usize,
    pub num_procs: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseClassSummary {
    pub phase: Phase,
    pub class: MessageClass,
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub total: Summary,
    pub inter: Summary,
    pub intra: Summary,
    pub copied_values: u64,
    pub phases: Vec<PhaseClassSummary>,
}

impl StatsReport {
    pub fn new(stats: &MessageStats) -> Self {
        let mut phases = Vec::new();
        let mut seen: Vec<(Phase, MessageClass)> = stats.records.iter().map(|r| (r.phase, r.class)).collect();
        seen.sort_by_key(|&(p, c)| (p, c == MessageClass::Inter));
        seen.dedup();
        for (phase, class) in seen {
            phases.push(PhaseClassSummary {
                phase,
                class,
                summary: stats.phase_summary(phase, class),
            });
        }
        StatsReport {
            total: stats.summary(|_| true),
            inter: stats.class_summary(MessageClass::Inter),
            intra: stats.class_summary(MessageClass::Intra),
            copied_values: stats.copied_values(),
            phases,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub phases: Vec<PhaseCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmReport {
    pub verified: bool,
    pub max_abs_err: Option<f64>,
    pub max_rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub messages: Option<StatsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modeled_cost: Option<CostReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub stats: Option<MessageStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub inter_msgs_reduction: Ratio,
    pub inter_bytes_reduction: Ratio,
    pub modeled_speedup: Option<Ratio>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Algorithms {
    pub standard: AlgorithmReport,
    pub node_aware: AlgorithmReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub matrix: MatrixInfo,
    pub topology: TopologyInfo,
    pub partition: PartitionKind,
    pub tolerance: f64,
    pub algorithms: Algorithms,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

impl RunReport {
    pub fn verified(&self) -> bool {
        self.algorithms.standard.verified && self.algorithms.node_aware.verified
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn algorithm_report(
    result: napspmv::Result<(Vec<f64>, MessageStats)>,
    oracle: &[f64],
    problem: &Problem,
    params: &ModelParams,
) -> AlgorithmReport {
    match result {
        Ok((w, stats)) => {
            let check = compare_to_oracle(&w, oracle);
            let modeled_cost = match model_stats(&stats, &problem.topology, params) {
                Ok(c) => CostReport {
                    total: Some(c.total),
                    phases: c.phases,
                    error: None,
                },
                Err(e) => CostReport {
                    total: None,
                    phases: Vec::new(),
                    error: Some(e.to_string()),
                },
            };
            AlgorithmReport {
                verified: check.verified,
                max_abs_err: Some(check.max_abs_err),
                max_rel_err: Some(check.max_rel_err),
                messages: Some(StatsReport::new(&stats)),
                modeled_cost: Some(modeled_cost),
                error: None,
                stats: Some(stats),
            }
        }
        Err(e) => AlgorithmReport {
            verified: false,
            max_abs_err: None,
            max_rel_err: None,
            messages: None,
            modeled_cost: None,
            error: Some(e.to_string()),
            stats: None,
        },
    }
}

/// Runs the serial oracle and both distributed algorithms on `problem`.
pub fn run_problem(
    problem: &Problem,
    vector_seed: u64,
    params: &ModelParams,
    schedule: Schedule,
) -> Result<RunReport, CliError> {
    let a = &problem.matrix;
    let v = random_vector(a.ncols(), vector_seed);
    let oracle = run_serial_spmv(a, &v)?;
    let (part, topo) = (&problem.partition, &problem.topology);
    let standard = algorithm_report(run_standard_spmv(a, &v, part, topo, schedule), &oracle, problem, params);
    let node_aware = algorithm_report(run_napspmv(a, &v, part, topo, schedule), &oracle, problem, params);

    let comparison = match (&standard.messages, &node_aware.messages) {
        (Some(s), Some(n)) => {
            let total = |r: &AlgorithmReport| r.modeled_cost.as_ref().and_then(|c| c.total);
            Some(Comparison {
                inter_msgs_reduction: Ratio::of(s.inter.messages as f64, n.inter.messages as f64),
                inter_bytes_reduction: Ratio::of(s.inter.bytes as f64, n.inter.bytes as f64),
                modeled_speedup: match (total(&standard), total(&node_aware)) {
                    (Some(ts), Some(tn)) => Some(Ratio::of(ts, tn)),
                    _ => None,
                },
            })
        }
        _ => None,
    };

    Ok(RunReport {
        matrix: MatrixInfo {
            source: problem.source.clone(),
            n: a.nrows(),
            nnz: a.nnz(),
        },
        topology: TopologyInfo {
            nodes: topo.num_nodes(),
            ppn: topo.ppn(),
            num_procs: topo.num_procs(),
        },
        partition: problem.partition_kind(),
        tolerance: napspmv::sim::TOLERANCE,
        algorithms: Algorithms { standard, node_aware },
        comparison,
    })
}
