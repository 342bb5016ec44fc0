//! Built-in inputs with known communication tables.

use crate::{
    comm::NodeProcessMap,
    sparse::{matrix_market, CsrMatrix, Partition},
    topology::Topology,
};

/// Matrix Market text of the six-row example.
pub const EXAMPLE1_MTX: &str = include_str!("../params/example1.mtx");

/// A matrix together with the cluster layout it is meant to run on.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub matrix: CsrMatrix,
    pub topology: Topology,
    pub partition: Partition,
}

/// Six ranks on three nodes (ppn = 2), one row per rank.
///
/// Row pattern: 0:{0,1,3,5} 1:{1,4} 2:{2,3} 3:{0,1,2,3} 4:{0,2,4} 5:{0,5},
/// with `A(i, j) = 10 i + j + 1`.
pub fn example1() -> Fixture {
    let matrix = matrix_market::parse_matrix_market(EXAMPLE1_MTX.as_bytes())
        .expect("bundled fixture parses");
    let topology = Topology::new(3, 2).expect("valid topology");
    let partition = Partition::contiguous(6, &topology).expect("one row per rank");
    Fixture {
        name: "example1",
        matrix,
        topology,
        partition,
    }
}

/// The send/receive node mapping published alongside the example.
///
/// Its send side matches [`crate::comm::assign_nodes_to_procs`]; on the
/// receive side node 0 swaps its two sources relative to the size-ordered
/// rule (node 2 -> (0, 0), node 1 -> (1, 0)).
pub fn example1_published_map() -> NodeProcessMap {
    NodeProcessMap::from_lists(
        vec![vec![1], vec![2], vec![0], vec![2], vec![0], vec![]],
        vec![vec![2], vec![1], vec![], vec![0], vec![1], vec![0]],
    )
}

pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "example1" => Some(example1()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_pattern_and_values() {
        let ex = example1();
        let expect: [&[usize]; 6] = [&[0, 1, 3, 5], &[1, 4], &[2, 3], &[0, 1, 2, 3], &[0, 2, 4], &[0, 5]];
        for (i, cols) in expect.iter().enumerate() {
            let (c, v) = ex.matrix.row(i);
            assert_eq!(c, *cols);
            for (&j, &x) in c.iter().zip(v) {
                assert_eq!(x, (10 * i + j + 1) as f64);
            }
        }
        assert!(by_name("example1").is_some());
        assert!(by_name("nope").is_none());
    }
}
