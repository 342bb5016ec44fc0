//! Standard and node-aware parallel sparse matrix-vector multiplication.
//!
//! The crate compiles the communication pattern of a row-distributed SpMV in
//! two forms: the reference point-to-point exchange, and the node-aware form
//! that gathers values on a node, sends each distinct value across a node
//! pair exactly once, and scatters on the receiving node. Both forms are
//! executed on a deterministic in-process simulated cluster that audits
//! every message, and the resulting [`MessageStats`] can be priced with
//! latency/bandwidth models in [`cost`].
//!
//! ```
//! use napspmv::{fixtures, sim::{self, Schedule}};
//!
//! let ex = fixtures::example1();
//! let v = vec![1.0; ex.matrix.nrows()];
//! let (w, stats) = sim::run_napspmv(&ex.matrix, &v, &ex.partition, &ex.topology, Schedule::Sequential).unwrap();
//! assert_eq!(w[0], 13.0);
//! assert_eq!(stats.summary(|r| r.class == napspmv::stats::MessageClass::Inter).messages, 5);
//! ```

pub mod comm;
pub mod cost;
mod error;
pub mod fixtures;
pub mod par;
pub mod sim;
pub mod sparse;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use stats::MessageStats;
pub use topology::{RankTuple, Topology};
