//! Latency/bandwidth models for inter- and intra-node messages.
//!
//! * postal: `T = alpha + s / B_max`
//! * max-rate: `T = alpha + ppn * s / min(B_N, B_max + (ppn - 1) B_inj)`
//! * intra-node: `T = alpha_l + s / B_max_l`
//!
//! Every parameter depends on the message protocol, which is chosen from
//! the message size. Defaults are the measured Blue Waters values shipped in
//! `params/blue_waters.json`.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::{
    stats::{MessageClass, MessageStats, Phase},
    topology::Topology,
    Error, Result,
};

const BUNDLED: &str = include_str!("../params/blue_waters.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Short,
    Eager,
    Rendezvous,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{protocol:?} bandwidth term {denominator:e} is not positive (ppn = {ppn})")]
    Domain {
        protocol: Protocol,
        ppn: usize,
        denominator: f64,
    },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

fn ser_rate<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_rate<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Rate {
        Num(f64),
        Text(String),
    }
    match Rate::deserialize(d)? {
        Rate::Num(x) => Ok(x),
        Rate::Text(t) if t.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
        Rate::Text(t) => Err(serde::de::Error::custom(format!(
            "expected a number or \"inf\", got \"{t}\""
        ))),
    }
}

/// Parameters of one protocol. Times in seconds, rates in bytes/second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub alpha: f64,
    pub b_inj: f64,
    pub b_max: f64,
    /// NIC peak rate; `"inf"` in JSON when unbounded.
    #[serde(serialize_with = "ser_rate", deserialize_with = "de_rate")]
    pub b_n: f64,
    pub alpha_l: f64,
    pub b_max_l: f64,
}

/// Upper byte limits of the short and eager protocols (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub short_max: u64,
    pub eager_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub short: ProtocolParams,
    pub eager: ProtocolParams,
    pub rendezvous: ProtocolParams,
    pub thresholds: Thresholds,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            short: ProtocolParams {
                alpha: 4.0e-6,
                b_inj: 6.3e8,
                b_max: -1.8e7,
                b_n: f64::INFINITY,
                alpha_l: 1.3e-6,
                b_max_l: 4.2e8,
            },
            eager: ProtocolParams {
                alpha: 1.1e-5,
                b_inj: 1.7e9,
                b_max: 6.2e7,
                b_n: f64::INFINITY,
                alpha_l: 1.6e-6,
                b_max_l: 7.4e8,
            },
            rendezvous: ProtocolParams {
                alpha: 2.0e-5,
                b_inj: 3.6e9,
                b_max: 6.1e8,
                b_n: 5.5e9,
                alpha_l: 4.2e-6,
                b_max_l: 3.1e9,
            },
            thresholds: Thresholds {
                short_max: 128,
                eager_max: 8192,
            },
        }
    }
}

impl ModelParams {
    /// The parameter file shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled parameters are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: ModelParams = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameters serialize")
    }

    pub fn validate(&self) -> std::result::Result<(), ModelError> {
        if self.thresholds.short_max >= self.thresholds.eager_max {
            return Err(ModelError::InvalidParams(
                "short_max must be below eager_max".into(),
            ));
        }
        for (name, p) in [
            ("short", &self.short),
            ("eager", &self.eager),
            ("rendezvous", &self.rendezvous),
        ] {
            if !(p.alpha_l > 0.0 && p.b_max_l > 0.0) {
                return Err(ModelError::InvalidParams(format!(
                    "{name}: intra-node parameters must be positive"
                )));
            }
            if p.alpha.is_nan() || p.alpha < 0.0 || p.b_inj.is_nan() || p.b_max.is_nan() || p.b_n.is_nan() {
                return Err(ModelError::InvalidParams(format!(
                    "{name}: latency must be non-negative and rates numeric"
                )));
            }
        }
        Ok(())
    }

    pub fn protocol(&self, protocol: Protocol) -> &ProtocolParams {
        match protocol {
            Protocol::Short => &self.short,
            Protocol::Eager => &self.eager,
            Protocol::Rendezvous => &self.rendezvous,
        }
    }
}

pub fn select_protocol(bytes: u64, params: &ModelParams) -> Protocol {
    if bytes <= params.thresholds.short_max {
        Protocol::Short
    } else if bytes <= params.thresholds.eager_max {
        Protocol::Eager
    } else {
        Protocol::Rendezvous
    }
}

pub fn model_postal(
    bytes: u64,
    params: &ModelParams,
    protocol: Protocol,
) -> std::result::Result<f64, ModelError> {
    let p = params.protocol(protocol);
    if p.b_max.is_nan() || p.b_max <= 0.0 {
        return Err(ModelError::Domain {
            protocol,
            ppn: 1,
            denominator: p.b_max,
        });
    }
    Ok(p.alpha + bytes as f64 / p.b_max)
}

pub fn model_max_rate(
    bytes: u64,
    ppn: usize,
    params: &ModelParams,
    protocol: Protocol,
) -> std::result::Result<f64, ModelError> {
    let p = params.protocol(protocol);
    let ppn_f = ppn as f64;
    let aggregate = p.b_max + (ppn_f - 1.0) * p.b_inj;
    let denominator = aggregate.min(p.b_n);
    if ppn == 0 || denominator.is_nan() || denominator <= 0.0 {
        return Err(ModelError::Domain {
            protocol,
            ppn,
            denominator,
        });
    }
    Ok(p.alpha + ppn_f * bytes as f64 / denominator)
}

pub fn model_intra(bytes: u64, params: &ModelParams, protocol: Protocol) -> f64 {
    let p = params.protocol(protocol);
    p.alpha_l + bytes as f64 / p.b_max_l
}

/// Modeled time of one phase, charged to its slowest rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub phase: Phase,
    /// Rank with the largest summed send charge (lowest id on ties).
    pub critical_rank: usize,
    /// That rank's intra-node share.
    pub intra_seconds: f64,
    /// That rank's inter-node share.
    pub inter_seconds: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeledCost {
    pub phases: Vec<PhaseCost>,
    pub total: f64,
}

impl ModeledCost {
    pub fn phase(&self, phase: Phase) -> Option<&PhaseCost> {
        self.phases.iter().find(|p| p.phase == phase)
    }
}

/// Charges every message: intra-node ones with the intra-node model,
/// inter-node ones with the max-rate model at the topology's ppn, each with
/// the protocol its size selects. A phase costs the largest per-rank sum of
/// send charges; the total is the sum over phases.
pub fn model_stats(stats: &MessageStats, topo: &Topology, params: &ModelParams) -> Result<ModeledCost> {
    let mut order: Vec<usize> = (0..stats.records.len()).collect();
    order.sort_by_key(|&k| {
        let r = &stats.records[k];
        (r.phase, r.src, r.dst)
    });

    let mut cost = ModeledCost::default();
    let mut k = 0;
    while k < order.len() {
        let phase = stats.records[order[k]].phase;
        // (intra, inter) per rank
        let mut per_rank = vec![(0.0f64, 0.0f64); stats.num_procs];
        while k < order.len() && stats.records[order[k]].phase == phase {
            let rec = &stats.records[order[k]];
            let protocol = select_protocol(rec.byte_count, params);
            let slot = per_rank.get_mut(rec.src).ok_or(Error::RankOutOfRange {
                rank: rec.src,
                num_procs: stats.num_procs,
            })?;
            match rec.class {
                MessageClass::Intra => slot.0 += model_intra(rec.byte_count, params, protocol),
                MessageClass::Inter => {
                    slot.1 += model_max_rate(rec.byte_count, topo.ppn(), params, protocol)
                        .map_err(|source| Error::ModelRecord {
                            record: *rec,
                            source,
                        })?
                }
            }
            k += 1;
        }
        let mut best = PhaseCost {
            phase,
            critical_rank: 0,
            intra_seconds: 0.0,
            inter_seconds: 0.0,
            seconds: f64::NEG_INFINITY,
        };
        for (rank, &(intra, inter)) in per_rank.iter().enumerate() {
            let t = intra + inter;
            if t > best.seconds {
                best = PhaseCost {
                    phase,
                    critical_rank: rank,
                    intra_seconds: intra,
                    inter_seconds: inter,
                    seconds: t,
                };
            }
        }
        cost.total += best.seconds;
        cost.phases.push(best);
    }
    Ok(cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bundled_file_equals_defaults() {
        assert_eq!(ModelParams::bundled(), ModelParams::default());
        let round = ModelParams::from_json(&ModelParams::default().to_json()).unwrap();
        assert_eq!(round, ModelParams::default());
        assert!(ModelParams::default().to_json().contains("\"inf\""));
    }

    #[test]
    fn protocol_selection() {
        let p = ModelParams::default();
        assert_eq!(select_protocol(64, &p), Protocol::Short);
        assert_eq!(select_protocol(128, &p), Protocol::Short);
        assert_eq!(select_protocol(4096, &p), Protocol::Eager);
        assert_eq!(select_protocol(8192, &p), Protocol::Eager);
        assert_eq!(select_protocol(1_000_000, &p), Protocol::Rendezvous);
    }

    #[test]
    fn postal_examples() {
        let p = ModelParams::default();
        assert_eq!(model_postal(0, &p, Protocol::Eager).unwrap(), 1.1e-5);
        let t = model_postal(1_000_000, &p, Protocol::Rendezvous).unwrap();
        assert!(rel(t, 2.0e-5 + 1e6 / 6.1e8) < 1e-14);
        assert!((t - 1.659e-3).abs() < 1e-6);
        let t = model_postal(8192, &p, Protocol::Eager).unwrap();
        assert!((t - 1.431e-4).abs() < 1e-7);
        assert!(matches!(
            model_postal(8, &p, Protocol::Short),
            Err(ModelError::Domain { .. })
        ));
    }

    #[test]
    fn max_rate_examples() {
        let p = ModelParams::default();
        let t = model_max_rate(65_536, 16, &p, Protocol::Rendezvous).unwrap();
        assert!(rel(t, 2.0e-5 + 1_048_576.0 / 5.5e9) < 1e-12);
        assert!((t - 2.107e-4).abs() < 1e-7);
        assert!(matches!(
            model_max_rate(0, 1, &p, Protocol::Short),
            Err(ModelError::Domain { ppn: 1, .. })
        ));
        // smallest ppn where the short protocol is defined
        assert!(model_max_rate(64, 2, &p, Protocol::Short).is_ok());
        assert!(model_max_rate(64, 0, &p, Protocol::Eager).is_err());
    }

    #[test]
    fn intra_examples() {
        let p = ModelParams::default();
        assert_eq!(model_intra(0, &p, Protocol::Short), 1.3e-6);
        assert!((model_intra(1_000_000, &p, Protocol::Rendezvous) - 3.268e-4).abs() < 1e-7);
        assert!((model_intra(8192, &p, Protocol::Eager) - 1.267e-5).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = ModelParams::default();
        p.thresholds.eager_max = 128;
        assert!(p.validate().is_err());
        let mut p = ModelParams::default();
        p.eager.b_max_l = 0.0;
        assert!(p.validate().is_err());
        assert!(ModelParams::from_json("{\"short\": 1}").is_err());
        let text = ModelParams::default().to_json().replace("\"inf\"", "\"many\"");
        assert!(ModelParams::from_json(&text).is_err());
    }

    #[test]
    fn stats_costing() {
        let p = ModelParams::default();
        let topo = Topology::new(2, 2).unwrap();
        assert_eq!(model_stats(&MessageStats::new(4), &topo, &p).unwrap().total, 0.0);

        let mut s = MessageStats::new(4);
        s.record(&topo, Phase::Standard, 0, 1, 2); // intra, 16 B
        s.record(&topo, Phase::Standard, 0, 2, 2); // inter, 16 B
        s.record(&topo, Phase::Standard, 3, 1, 1000); // inter, 8000 B
        let c = model_stats(&s, &topo, &p).unwrap();
        let r0 = model_intra(16, &p, Protocol::Short) + model_max_rate(16, 2, &p, Protocol::Short).unwrap();
        let r3 = model_max_rate(8000, 2, &p, Protocol::Eager).unwrap();
        assert_eq!(c.phases.len(), 1);
        assert_eq!(c.total, r0.max(r3));
        assert_eq!(c.phases[0].critical_rank, if r3 > r0 { 3 } else { 0 });
        let ph = c.phases[0];
        assert_eq!(ph.intra_seconds + ph.inter_seconds, ph.seconds);
    }

    #[test]
    fn all_intra_single_node() {
        let p = ModelParams::default();
        let topo = Topology::new(1, 1).unwrap();
        let mut s = MessageStats::new(1);
        // a lone rank never messages itself, so hand-craft an intra record
        s.records.push(crate::stats::MessageRecord {
            phase: Phase::FullyLocal,
            src: 0,
            dst: 0,
            value_count: 3,
            byte_count: 24,
            class: MessageClass::Intra,
        });
        let c = model_stats(&s, &topo, &p).unwrap();
        assert_eq!(c.total, model_intra(24, &p, Protocol::Short));
    }

    #[test]
    fn domain_error_names_record() {
        let p = ModelParams::default();
        let topo = Topology::new(2, 1).unwrap();
        let mut s = MessageStats::new(2);
        s.record(&topo, Phase::Standard, 0, 1, 1);
        match model_stats(&s, &topo, &p) {
            Err(Error::ModelRecord { record, .. }) => assert_eq!(record.dst, 1),
            other => panic!("expected a record error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn monotone_in_bytes(a in 0u64..10_000_000, d in 1u64..1_000_000, ppn in 2usize..64) {
            let p = ModelParams::default();
            for proto in [Protocol::Short, Protocol::Eager, Protocol::Rendezvous] {
                prop_assert!(model_intra(a + d, &p, proto) > model_intra(a, &p, proto));
                prop_assert!(model_max_rate(a + d, ppn, &p, proto).unwrap() > model_max_rate(a, ppn, &p, proto).unwrap());
            }
        }

        #[test]
        fn intra_cheaper_than_inter_rendezvous(s in 0u64..100_000_000, ppn in 1usize..64) {
            let p = ModelParams::default();
            let intra = model_intra(s, &p, Protocol::Rendezvous);
            let inter = model_max_rate(s, ppn, &p, Protocol::Rendezvous).unwrap();
            prop_assert!(intra < inter);
        }

        #[test]
        fn ppn1_unbounded_nic_is_postal(s in 0u64..100_000_000, alpha in 1e-7f64..1e-4, bmax in 1e6f64..1e10) {
            let mut p = ModelParams::default();
            p.eager.alpha = alpha;
            p.eager.b_max = bmax;
            p.eager.b_n = f64::INFINITY;
            prop_assert_eq!(
                model_max_rate(s, 1, &p, Protocol::Eager).unwrap(),
                model_postal(s, &p, Protocol::Eager).unwrap()
            );
        }

        #[test]
        fn duplicating_records_doubles_cost(values in prop::collection::vec((0usize..8, 0usize..8, 1usize..3000), 1..40)) {
            let p = ModelParams::default();
            let topo = Topology::new(4, 2).unwrap();
            let mut s = MessageStats::new(8);
            for &(a, b, v) in &values {
                if a != b {
                    s.record(&topo, Phase::Standard, a, b, v);
                }
            }
            let once = model_stats(&s, &topo, &p).unwrap().total;
            let mut twice = s.clone();
            twice.records.extend(s.records.clone());
            let doubled = model_stats(&twice, &topo, &p).unwrap().total;
            prop_assert!((doubled - 2.0 * once).abs() <= 1e-12 * once.max(1e-30));
        }
    }
}
