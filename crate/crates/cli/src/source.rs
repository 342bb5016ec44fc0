use std::{
    fs::File,
    io::BufReader,
    path::{Path, PathBuf},
    str::FromStr,
};

use napspmv::{
    fixtures,
    sparse::{generate_random, matrix_market::parse_matrix_market, CsrMatrix, Partition, PartitionKind},
    Topology,
};

use crate::{args::{RunArgs, SourceArgs}, CliError};

const DEFAULT_NODES: usize = 2;
const DEFAULT_PPN: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSpec {
    Contiguous,
    Strided,
    File(PathBuf),
}

impl FromStr for PartitionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "contiguous" => Ok(PartitionSpec::Contiguous),
            "strided" => Ok(PartitionSpec::Strided),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(PartitionSpec::File(PathBuf::from(p))),
                _ => Err(format!("expected contiguous, strided or file:<path>, got `{s}`")),
            },
        }
    }
}

impl PartitionSpec {
    pub fn build(&self, n: usize, topo: &Topology) -> Result<Partition, CliError> {
        Ok(match self {
            PartitionSpec::Contiguous => Partition::contiguous(n, topo)?,
            PartitionSpec::Strided => Partition::strided(n, topo)?,
            PartitionSpec::File(p) => Partition::from_reader(BufReader::new(open(p)?), n, topo)?,
        })
    }
}

pub fn parse_random(s: &str) -> Result<(usize, usize), String> {
    let (r, k) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected <rows>x<nnz_per_row>, got `{s}`"))?;
    let r = r.trim().parse().map_err(|e| format!("bad row count `{r}`: {e}"))?;
    let k = k.trim().parse().map_err(|e| format!("bad nnz per row `{k}`: {e}"))?;
    Ok((r, k))
}

pub fn parse_topology(s: &str) -> Result<(usize, usize), String> {
    parse_random(s).map_err(|_| format!("expected <nodes>x<ppn>, got `{s}`"))
}

pub(crate) fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A matrix with the topology and partition it will run on.
#[derive(Debug, Clone)]
pub struct Problem {
    pub source: String,
    pub matrix: CsrMatrix,
    pub topology: Topology,
    pub partition: Partition,
}

impl Problem {
    pub fn partition_kind(&self) -> PartitionKind {
        self.partition.kind()
    }
}

pub fn load_problem(src: &SourceArgs, run: &RunArgs) -> Result<Problem, CliError> {
    let (source, matrix, default_topo) = if let Some(path) = &src.mtx {
        let m = parse_matrix_market(BufReader::new(open(path)?))?;
        (format!("mtx:{}", path.display()), m, None)
    } else if let Some((rows, k)) = src.random {
        let m = generate_random(rows, k, run.seed)?;
        (format!("random:{rows}x{k}"), m, None)
    } else if let Some(name) = &src.fixture {
        let f = fixtures::by_name(name)
            .ok_or_else(|| CliError::Usage(format!("unknown fixture `{name}`")))?;
        (format!("fixture:{}", f.name), f.matrix, Some(f.topology))
    } else {
        return Err(CliError::Usage("no matrix source given".into()));
    };
    if matrix.nrows() != matrix.ncols() {
        return Err(CliError::Usage(format!(
            "matrix must be square, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let nodes = run
        .nodes
        .or(default_topo.map(|t| t.num_nodes()))
        .unwrap_or(DEFAULT_NODES);
    let ppn = run.ppn.or(default_topo.map(|t| t.ppn())).unwrap_or(DEFAULT_PPN);
    let topology = Topology::new(nodes, ppn)?;
    let partition = run.partition.build(matrix.nrows(), &topology)?;
    Ok(Problem {
        source,
        matrix,
        topology,
        partition,
    })
}
