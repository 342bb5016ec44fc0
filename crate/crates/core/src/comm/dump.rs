//! JSON views of the patterns, keyed by rank (or node) id.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Exchange, NodeAwarePattern, StandardPattern};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpEntry {
    pub dest: usize,
    pub indices: Vec<usize>,
}

/// `{sender: [{dest, indices}]}` with every sender present.
pub type PatternDump = BTreeMap<usize, Vec<DumpEntry>>;

fn dump_exchange(ex: &Exchange) -> PatternDump {
    ex.sends
        .iter()
        .enumerate()
        .map(|(src, list)| {
            let entries = list
                .iter()
                .map(|m| DumpEntry {
                    dest: m.peer,
                    indices: m.indices.clone(),
                })
                .collect();
            (src, entries)
        })
        .collect()
}

fn dump_lists(lists: &[Vec<usize>]) -> BTreeMap<usize, Vec<usize>> {
    lists.iter().cloned().enumerate().collect()
}

impl StandardPattern {
    pub fn dump(&self) -> PatternDump {
        dump_exchange(&self.exchange)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAwareDump {
    pub node_sends: BTreeMap<usize, Vec<usize>>,
    pub node_indices: PatternDump,
    pub send_map: BTreeMap<usize, Vec<usize>>,
    pub recv_map: BTreeMap<usize, Vec<usize>>,
    pub inter_proc: PatternDump,
    pub local_initial: PatternDump,
    pub local_dist: PatternDump,
    pub fully_local: PatternDump,
}

impl NodeAwarePattern {
    pub fn dump(&self) -> NodeAwareDump {
        let node_sends = (0..self.node.num_nodes())
            .map(|n| (n, self.node.destinations(n)))
            .collect();
        NodeAwareDump {
            node_sends,
            node_indices: dump_exchange(&self.node.exchange),
            send_map: dump_lists(&self.map.send_map),
            recv_map: dump_lists(&self.map.recv_map),
            inter_proc: dump_exchange(&self.inter.exchange),
            local_initial: dump_exchange(&self.initial.exchange),
            local_dist: dump_exchange(&self.dist.exchange),
            fully_local: dump_exchange(&self.fully_local.exchange),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::{comm::build_standard_pattern, fixtures};

    #[test]
    fn standard_json_shape() {
        let ex = fixtures::example1();
        let pat = build_standard_pattern(&ex.matrix, &ex.partition, &ex.topology).unwrap();
        let v = serde_json::to_value(pat.dump()).unwrap();
        assert_eq!(
            v["0"],
            serde_json::json!([
                {"dest": 3, "indices": [0]},
                {"dest": 4, "indices": [0]},
                {"dest": 5, "indices": [0]}
            ])
        );
        assert_eq!(v.as_object().unwrap().len(), 6);
    }
}
