//! Sparse matrix storage, ingestion, generation and row partitioning.

mod blocks;
mod csr;
mod generate;
pub mod matrix_market;
mod partition;

pub use blocks::{split_blocks, Block, LocalBlocks, RemoteBlocks, SplitMode};
pub use csr::{local_spmv, CsrMatrix};
pub use generate::{generate_random, random_vector};
pub use partition::{Partition, PartitionKind};
