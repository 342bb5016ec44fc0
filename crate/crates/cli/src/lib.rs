//! Library half of the `napspmv` command: argument types, matrix loading,
//! single-run reports and scaling sweeps.

pub mod args;
pub mod report;
pub mod source;
pub mod sweep;

use std::{fs, io::Write, path::{Path, PathBuf}};

use napspmv::{
    comm::{build_standard_pattern, NodeAwarePattern},
    cost::ModelParams,
    par::Schedule,
};

use args::{Cli, Command, DumpArgs, VerifyArgs};
use report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] napspmv::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNVERIFIED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Seed of the input vector paired with a matrix seed.
pub fn vector_seed(seed: u64) -> u64 {
    !seed
}

pub fn verify(args: &VerifyArgs) -> Result<RunReport, CliError> {
    let problem = source::load_problem(&args.source, &args.run)?;
    let params = match &args.model_params {
        Some(p) => ModelParams::from_path(p)?,
        None => ModelParams::default(),
    };
    report::run_problem(&problem, vector_seed(args.run.seed), &params, Schedule::Parallel)
}

pub fn pattern_dump(args: &DumpArgs) -> Result<String, CliError> {
    let p = source::load_problem(&args.source, &args.run)?;
    let value = if args.node_aware {
        let pat = NodeAwarePattern::build(&p.matrix, &p.partition, &p.topology)?;
        serde_json::to_string_pretty(&pat.dump())
    } else {
        let pat = build_standard_pattern(&p.matrix, &p.partition, &p.topology)?;
        serde_json::to_string_pretty(&pat.dump())
    };
    let mut s = value.expect("pattern serializes");
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Verify(a) => verify(&a).and_then(|r| {
            emit(a.out.as_deref(), &r.to_json())?;
            if r.verified() {
                Ok(EXIT_OK)
            } else {
                eprintln!("error: distributed result does not match the serial product");
                Ok(EXIT_UNVERIFIED)
            }
        }),
        Command::PatternDump(a) => pattern_dump(&a).and_then(|s| emit(a.out.as_deref(), &s).map(|_| EXIT_OK)),
        Command::Sweep(a) => sweep::plan(&a).and_then(|p| {
            let csv = sweep::run_sweep(&p, Schedule::Parallel);
            emit(a.out.as_deref(), &csv).map(|_| EXIT_OK)
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

#[cfg(test)]
mod tests;
