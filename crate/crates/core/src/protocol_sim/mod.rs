//! Message-level simulation of block Markov decode-and-forward relaying.
//!
//! In block `b` node `i` bins `w_i(b)` together with the messages its
//! encode-sets ask it to relay and sends the bin index with full power.
//! At the end of the block every receiver decodes independently: it keeps
//! every codeword it has observed so far, drops those whose bundle it fully
//! knows, and repeatedly peels a multi-block multiple-access problem whose
//! candidates are the oldest unknown message of each node it decodes.
//! Codewords carrying anything outside the candidates count as noise.
//! Decoding at `(i, b)` succeeds when every message the decode-sets require
//! is known afterwards; on failure the node's knowledge is left unchanged
//! and the run continues.

mod payload;
mod trace;

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::mac_region::{capacity, strictly_below, Codeword, MacError, MultiBlockMac, Subset, MAX_EXACT_SOURCES};
use crate::topology::{
    coverage_check, distance_ordering_check, k_hop_neighbors, line_one_hop, validate_schedule, NodeId, NodeSet,
    Schedule, ScheduleViolation, Topology, TopologyError,
};

pub use payload::{payload_demo, PayloadError, PayloadReport};
pub use trace::{interference_accounting, FreshShape, InterferenceReport, Message, NodeRecord, SimulationTrace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid schedule: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schedule(Vec<ScheduleViolation>),
    #[error("schedule covers {schedule} nodes but the topology has {topology}")]
    NodeCountMismatch { schedule: usize, topology: usize },
    #[error("common rate must be finite and nonnegative, got {0}")]
    InvalidRate(f64),
    #[error("no 1-hop sets given and the network has no line ordering to derive them from")]
    NoOneHop,
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Mac(#[from] MacError),
}

/// Runs `blocks` blocks of the given schedule at common rate `rate`.
pub fn run_schedule(
    topology: &Topology,
    schedule: &Schedule,
    rate: f64,
    blocks: usize,
) -> Result<SimulationTrace, SimError> {
    let n = topology.node_count();
    if schedule.node_count() != n {
        return Err(SimError::NodeCountMismatch {
            schedule: schedule.node_count(),
            topology: n,
        });
    }
    validate_schedule(schedule, n).map_err(SimError::Schedule)?;
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(SimError::InvalidRate(rate));
    }
    let powers = topology.power_matrix()?;
    let noise = topology.noise();
    let order = distance_ordering_check(topology);

    let targets: Vec<NodeSet> = (0..n).map(|i| schedule.decoded_by(i)).collect();
    let sum_rate_ok = (0..n)
        .map(|i| {
            let others: NodeSet = (0..n).filter(|&j| j != i && !targets[i].contains(&j)).collect();
            let interference = powers.sum_at(&others, i);
            strictly_below(
                targets[i].len() as f64 * rate,
                capacity(powers.sum_at(&targets[i], i) / (noise + interference)),
                crate::mac_region::DEFAULT_EPSILON,
            )
        })
        .collect();

    let mut known: Vec<BTreeSet<Message>> = vec![BTreeSet::new(); n];
    let mut bundles: Vec<Vec<Vec<Message>>> = Vec::with_capacity(blocks);
    let mut records: Vec<Vec<NodeRecord>> = Vec::with_capacity(blocks);

    for b in 1..=blocks {
        for (i, k) in known.iter_mut().enumerate() {
            k.insert(Message::new(i, b));
        }
        let mut gaps = Vec::with_capacity(n);
        let row: Vec<Vec<Message>> = (0..n)
            .map(|i| {
                let (bundle, missing) = transmit_bundle(schedule, &known[i], i, b);
                gaps.push(missing);
                bundle
            })
            .collect();
        bundles.push(row);

        let outcomes: Vec<Result<Vec<Message>, SimError>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let ctx = Receiver {
                    node: i,
                    block: b,
                    rate,
                    noise,
                    gains: (0..n).map(|t| powers.get(t, i)).collect(),
                    targets: &targets[i],
                };
                ctx.decode(&known[i], &bundles)
            })
            .collect();

        let mut row_records = Vec::with_capacity(n);
        for (i, (outcome, relay_gaps)) in outcomes.into_iter().zip(gaps).enumerate() {
            let decoded = outcome?;
            let scheduled = scheduled_messages(schedule, i, b);
            let success = scheduled.iter().all(|m| known[i].contains(m) || decoded.contains(m));
            if success {
                known[i].extend(decoded.iter().copied());
            }
            let fresh: NodeSet = decoded.iter().filter(|m| m.block == b).map(|m| m.node).collect();
            let fresh_shape = order.as_deref().map(|o| FreshShape::classify(o, i, &fresh));
            row_records.push(NodeRecord {
                node: i,
                block: b,
                bundle: bundles[b - 1][i].clone(),
                relay_gaps,
                scheduled,
                decoded,
                success,
                fresh,
                fresh_shape,
            });
        }
        records.push(row_records);
    }

    Ok(SimulationTrace {
        rate,
        schedule: schedule.clone(),
        powers,
        noise,
        order,
        records,
        sum_rate_ok,
        warnings: Vec::new(),
    })
}

/// The distance-regulated scheme: decode- and encode-sets are the k-hop
/// neighborhoods grown from `one_hop`. Nodes whose neighborhoods miss part
/// of the network are reported as warnings.
pub fn run_distance_regulated(
    topology: &Topology,
    one_hop: &[NodeSet],
    rate: f64,
    blocks: usize,
) -> Result<SimulationTrace, SimError> {
    let n = topology.node_count();
    if one_hop.len() != n {
        return Err(SimError::Topology(TopologyError::InvalidOneHop {
            node: one_hop.len(),
            reason: format!("expected {n} sets, got {}", one_hop.len()),
        }));
    }
    let neighbors = k_hop_neighbors(one_hop);
    let schedule = Schedule::distance_regulated(&neighbors);
    let mut trace = run_schedule(topology, &schedule, rate, blocks)?;
    trace.warnings = coverage_check(&neighbors, n)
        .into_iter()
        .enumerate()
        .filter(|(_, covered)| !covered)
        .map(|(i, _)| {
            format!(
                "node {} does not reach every other node through its neighborhoods",
                i + 1
            )
        })
        .collect();
    Ok(trace)
}

/// 1-hop sets attached to the topology, or the line neighbors of its
/// distance ordering.
pub fn default_one_hop(topology: &Topology) -> Result<Vec<NodeSet>, SimError> {
    if let Some(sets) = topology.one_hop() {
        return Ok(sets.to_vec());
    }
    distance_ordering_check(topology)
        .map(|order| line_one_hop(&order))
        .ok_or(SimError::NoOneHop)
}

/// `{w_i(b)} ∪ {w_j(b-k) : j in E_{i(k)}, k < b}`, restricted to what the
/// node knows; the rest is returned as relay gaps.
fn transmit_bundle(
    schedule: &Schedule,
    known: &BTreeSet<Message>,
    i: NodeId,
    b: usize,
) -> (Vec<Message>, Vec<Message>) {
    let mut bundle = vec![Message::new(i, b)];
    let mut gaps = Vec::new();
    for k in 1..b.min(schedule.horizon() + 1) {
        for &j in schedule.encode(i, k) {
            let m = Message::new(j, b - k);
            if known.contains(&m) {
                bundle.push(m);
            } else {
                gaps.push(m);
            }
        }
    }
    bundle.sort();
    (bundle, gaps)
}

/// `{w_{D_{i(k)}}(b-k+1) : 1 <= k <= b}`.
fn scheduled_messages(schedule: &Schedule, i: NodeId, b: usize) -> Vec<Message> {
    let mut out: Vec<Message> = (1..=b.min(schedule.horizon()))
        .flat_map(|k| schedule.decode(i, k).iter().map(move |&j| Message::new(j, b - k + 1)))
        .collect();
    out.sort();
    out
}

struct Receiver<'a> {
    node: NodeId,
    block: usize,
    rate: f64,
    noise: f64,
    /// Received power from each transmitter.
    gains: Vec<f64>,
    targets: &'a NodeSet,
}

impl Receiver<'_> {
    /// Everything decodable at the end of the block, in message order.
    fn decode(&self, known: &BTreeSet<Message>, bundles: &[Vec<Vec<Message>>]) -> Result<Vec<Message>, SimError> {
        let mut known = known.clone();
        let mut decoded = Vec::new();
        loop {
            let found = self.decode_round(&known, bundles)?;
            if found.is_empty() {
                break;
            }
            known.extend(found.iter().copied());
            decoded.extend(found);
        }
        decoded.sort();
        Ok(decoded)
    }

    fn decode_round(&self, known: &BTreeSet<Message>, bundles: &[Vec<Vec<Message>>]) -> Result<Vec<Message>, SimError> {
        // Oldest unknown message of each targeted node.
        let pool: Vec<Message> = self
            .targets
            .iter()
            .filter_map(|&j| {
                (1..=self.block)
                    .map(|c| Message::new(j, c))
                    .find(|m| !known.contains(m))
            })
            .collect();
        if pool.is_empty() {
            return Ok(Vec::new());
        }
        let index_of = |m: &Message| pool.iter().position(|p| p == m);

        let mut blocks = Vec::new();
        for row in bundles.iter().take(self.block) {
            let mut codewords = Vec::new();
            let mut useful = false;
            for (t, bundle) in row.iter().enumerate() {
                if t == self.node {
                    continue;
                }
                let power = self.gains[t];
                let mut carries = Subset::empty();
                let mut opaque = false;
                for m in bundle.iter().filter(|m| !known.contains(m)) {
                    match index_of(m) {
                        Some(k) => carries.insert(k),
                        None => opaque = true,
                    }
                }
                if opaque {
                    codewords.push(Codeword::opaque(power));
                } else if !carries.is_empty() {
                    useful = true;
                    codewords.push(Codeword::carrying(power, carries));
                }
            }
            if useful {
                blocks.push(codewords);
            }
        }

        let mac = MultiBlockMac::new(vec![self.rate; pool.len()], blocks, self.noise)?;
        let mut decoded = mac.peel(mac.messages()).decoded;
        if decoded.is_empty() && pool.len() <= MAX_EXACT_SOURCES {
            decoded = mac.max_decodable_subset(mac.messages())?;
        }
        Ok(decoded.iter().map(|k| pool[k]).collect())
    }
}
