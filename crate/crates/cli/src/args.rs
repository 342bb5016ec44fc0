use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::source::{parse_random, PartitionSpec};

#[derive(Debug, Parser)]
#[command(name = "napspmv", version, about = "Standard vs node-aware distributed SpMV on a simulated cluster")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run both algorithms, check them against the serial product, report
    /// message statistics and modeled cost as JSON.
    Verify(VerifyArgs),
    /// Print a communication pattern as JSON.
    PatternDump(DumpArgs),
    /// Weak or strong scaling sweep over random matrices, as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Matrix Market file.
    #[arg(long, value_name = "PATH")]
    pub mtx: Option<PathBuf>,
    /// Random matrix, `<rows>x<nnz_per_row>`.
    #[arg(long, value_name = "RxK", value_parser = parse_random)]
    pub random: Option<(usize, usize)>,
    /// Built-in matrix (`example1`).
    #[arg(long, value_name = "NAME")]
    pub fixture: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Seed for the random matrix and the input vector.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Node count (fixtures default to their own topology, otherwise 2).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Processes per node (fixtures default to their own, otherwise 2).
    #[arg(long)]
    pub ppn: Option<usize>,
    /// `contiguous`, `strided`, or `file:<path>` with one owner rank per line.
    #[arg(long, default_value = "contiguous")]
    pub partition: PartitionSpec,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Cost-model parameter file (JSON).
    #[arg(long, value_name = "PATH")]
    pub model_params: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Dump the node-aware pattern set instead of the standard pattern.
    #[arg(long)]
    pub node_aware: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    /// Rows grow with the process count.
    Weak,
    /// Fixed global size.
    Strong,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub kind: SweepKind,
    /// Rows per process (weak, default 1000) or total rows (strong, default 32768).
    #[arg(long)]
    pub base: Option<usize>,
    /// Comma-separated non-zeros per row.
    #[arg(long, default_value = "25,50,100")]
    pub nnz: String,
    /// Comma-separated matrix seeds.
    #[arg(long, default_value = "1,2,3,4,5")]
    pub seeds: String,
    /// Comma-separated `<nodes>x<ppn>` list; defaults to {2,4,8,16} x {2,4,8,16}.
    #[arg(long)]
    pub topos: Option<String>,
    /// `contiguous` or `strided`.
    #[arg(long, default_value = "contiguous")]
    pub partition: PartitionSpec,
    #[arg(long, value_name = "PATH")]
    pub model_params: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
