use std::fmt::Write as _;

use napspmv::{
    cost::ModelParams,
    par::{map_range_with, Schedule},
    sparse::generate_random,
    stats::MessageClass,
    Topology,
};

use crate::{
    args::{SweepArgs, SweepKind},
    report::{run_problem, AlgorithmReport},
    source::{parse_topology, PartitionSpec, Problem},
    vector_seed, CliError,
};

pub const HEADER: &str = "n_procs,nodes,ppn,nnz_per_row,seed,algorithm,inter_msgs_max,inter_bytes_max,intra_msgs_max,intra_bytes_max,modeled_seconds,verified";

pub const DEFAULT_WEAK_ROWS_PER_PROC: usize = 1000;
pub const DEFAULT_STRONG_ROWS: usize = 32768;
const DEFAULT_GRID: [usize; 4] = [2, 4, 8, 16];

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|e| CliError::Usage(format!("bad {what} `{t}`: {e}")))
        })
        .collect()
}

/// One grid point: a matrix on a topology.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub nodes: usize,
    pub ppn: usize,
    pub nnz_per_row: usize,
    pub seed: u64,
    pub rows: usize,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub cells: Vec<Cell>,
    pub partition: PartitionSpec,
    pub params: ModelParams,
}

pub fn plan(args: &SweepArgs) -> Result<SweepPlan, CliError> {
    if let PartitionSpec::File(_) = args.partition {
        return Err(CliError::Usage(
            "sweeps take contiguous or strided partitions only".into(),
        ));
    }
    let topos: Vec<(usize, usize)> = match &args.topos {
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| parse_topology(t).map_err(CliError::Usage))
            .collect::<Result<_, _>>()?,
        None => DEFAULT_GRID
            .iter()
            .flat_map(|&n| DEFAULT_GRID.iter().map(move |&p| (n, p)))
            .collect(),
    };
    let nnz: Vec<usize> = parse_list(&args.nnz, "nnz per row")?;
    let seeds: Vec<u64> = parse_list(&args.seeds, "seed")?;
    let base = args.base.unwrap_or(match args.kind {
        SweepKind::Weak => DEFAULT_WEAK_ROWS_PER_PROC,
        SweepKind::Strong => DEFAULT_STRONG_ROWS,
    });
    let mut cells = Vec::new();
    for &(nodes, ppn) in &topos {
        for &k in &nnz {
            for &seed in &seeds {
                let rows = match args.kind {
                    SweepKind::Weak => base * nodes * ppn,
                    SweepKind::Strong => base,
                };
                cells.push(Cell {
                    nodes,
                    ppn,
                    nnz_per_row: k,
                    seed,
                    rows,
                });
            }
        }
    }
    let params = match &args.model_params {
        Some(p) => ModelParams::from_path(p)?,
        None => ModelParams::default(),
    };
    Ok(SweepPlan {
        cells,
        partition: args.partition.clone(),
        params,
    })
}

fn run_cell(cell: &Cell, plan: &SweepPlan) -> Result<[AlgorithmReport; 2], CliError> {
    let topology = Topology::new(cell.nodes, cell.ppn)?;
    let matrix = generate_random(cell.rows, cell.nnz_per_row, cell.seed)?;
    let partition = plan.partition.build(cell.rows, &topology)?;
    let problem = Problem {
        source: String::new(),
        matrix,
        topology,
        partition,
    };
    let report = run_problem(&problem, vector_seed(cell.seed), &plan.params, Schedule::Sequential)?;
    Ok([report.algorithms.standard, report.algorithms.node_aware])
}

fn row(out: &mut String, cell: &Cell, algorithm: &str, rep: Option<&AlgorithmReport>) {
    let _ = write!(
        out,
        "{},{},{},{},{},{},",
        cell.nodes * cell.ppn,
        cell.nodes,
        cell.ppn,
        cell.nnz_per_row,
        cell.seed,
        algorithm
    );
    match rep.and_then(|r| r.stats.as_ref().map(|s| (r, s))) {
        Some((r, stats)) => {
            let inter = stats.class_summary(MessageClass::Inter);
            let intra = stats.class_summary(MessageClass::Intra);
            let seconds = r
                .modeled_cost
                .as_ref()
                .and_then(|c| c.total)
                .map(|t| t.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                inter.max_msgs_sent,
                inter.max_bytes_sent,
                intra.max_msgs_sent,
                intra.max_bytes_sent,
                seconds,
                r.verified
            );
        }
        None => out.push_str(",,,,,false\n"),
    }
}

/// Runs every cell (in parallel when enabled) and renders the CSV in grid
/// order.
pub fn run_sweep(plan: &SweepPlan, schedule: Schedule) -> String {
    let results = map_range_with(schedule, plan.cells.len(), |k| run_cell(&plan.cells[k], plan));
    let mut out = String::from(HEADER);
    out.push('\n');
    for (cell, result) in plan.cells.iter().zip(&results) {
        let reps = result.as_ref().ok();
        row(&mut out, cell, "standard", reps.map(|r| &r[0]));
        row(&mut out, cell, "node_aware", reps.map(|r| &r[1]));
    }
    out
}
