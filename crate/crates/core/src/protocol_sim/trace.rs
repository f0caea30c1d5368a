//! Simulation trace, knowledge queries and export.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::topology::{NodeId, NodeSet, PowerMatrix, Schedule};

/// Message `w_node(block)`; blocks are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub node: NodeId,
    pub block: usize,
}

impl Message {
    pub fn new(node: NodeId, block: usize) -> Self {
        Self { node, block }
    }
}

/// 1-based node id, `@`, block.
impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.node + 1, self.block)
    }
}

impl Serialize for Message {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Shape of the set of nodes whose fresh message a receiver decoded in a
/// block, relative to the receiver's position in the line ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreshShape {
    Empty,
    /// `{l, ..., i-1}`.
    Left,
    /// `{i+1, ..., r}`.
    Right,
    /// `{l, ..., i-1, i+1, ..., r}`.
    TwoSided,
    Other,
}

impl FreshShape {
    /// Classifies `fresh` for the receiver at position `pos` of `order`.
    pub fn classify(order: &[NodeId], receiver: NodeId, fresh: &NodeSet) -> Self {
        if fresh.is_empty() {
            return Self::Empty;
        }
        let mut position = vec![0; order.len()];
        for (p, &node) in order.iter().enumerate() {
            position[node] = p;
        }
        let me = position[receiver];
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = fresh.iter().map(|&j| position[j]).partition(|&p| p < me);
        left.sort_unstable();
        right.sort_unstable();
        let left_ok = left.iter().rev().enumerate().all(|(k, &p)| p + 1 + k == me);
        let right_ok = right.iter().enumerate().all(|(k, &p)| p == me + 1 + k);
        match (left.is_empty(), right.is_empty(), left_ok && right_ok) {
            (_, _, false) => Self::Other,
            (false, true, true) => Self::Left,
            (true, false, true) => Self::Right,
            (false, false, true) => Self::TwoSided,
            (true, true, true) => Self::Empty,
        }
    }
}

impl fmt::Display for FreshShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Empty => "empty",
            Self::Left => "left",
            Self::Right => "right",
            Self::TwoSided => "two-sided",
            Self::Other => "other",
        })
    }
}

/// What one node did in one block.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub node: NodeId,
    pub block: usize,
    /// Messages binned into the node's transmission.
    pub bundle: Vec<Message>,
    /// Messages the schedule asked the node to relay but it did not know.
    pub relay_gaps: Vec<Message>,
    /// Messages the schedule requires the node to decode at the end of the
    /// block.
    pub scheduled: Vec<Message>,
    /// `G_i(b)`: every message the node decoded at the end of the block.
    pub decoded: Vec<Message>,
    /// Whether every scheduled message was decoded.
    pub success: bool,
    /// Nodes whose block-`b` message is in `decoded`.
    pub fresh: NodeSet,
    /// Only for line-ordered networks.
    pub fresh_shape: Option<FreshShape>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub(crate) rate: f64,
    pub(crate) schedule: Schedule,
    pub(crate) powers: PowerMatrix,
    pub(crate) noise: f64,
    pub(crate) order: Option<Vec<NodeId>>,
    /// `records[b - 1][i]`.
    pub(crate) records: Vec<Vec<NodeRecord>>,
    pub(crate) sum_rate_ok: Vec<bool>,
    pub(crate) warnings: Vec<String>,
}

impl SimulationTrace {
    pub fn node_count(&self) -> usize {
        self.schedule.node_count()
    }

    pub fn block_count(&self) -> usize {
        self.records.len()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn powers(&self) -> &PowerMatrix {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Line ordering (position -> node) when the network has one.
    pub fn order(&self) -> Option<&[NodeId]> {
        self.order.as_deref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Record of node `i` in block `b` (1-based).
    pub fn record(&self, i: NodeId, b: usize) -> &NodeRecord {
        &self.records[b - 1][i]
    }

    pub fn records(&self) -> impl Iterator<Item = &NodeRecord> {
        self.records.iter().flatten()
    }

    /// Per node: whether `|D| R < log2(1 + P_D / N)` holds, where `D` is
    /// every node it decodes. This is necessary for decoding all of them.
    pub fn sum_rate_conditions(&self) -> &[bool] {
        &self.sum_rate_ok
    }

    /// `(node, block)` of every failed scheduled decode, block-major.
    pub fn failures(&self) -> Vec<(NodeId, usize)> {
        self.records()
            .filter(|r| !r.success)
            .map(|r| (r.node, r.block))
            .collect()
    }

    pub fn all_succeeded(&self) -> bool {
        self.records().all(|r| r.success)
    }

    /// First block with a failed scheduled decode.
    pub fn first_failure(&self) -> Option<usize> {
        self.records().find(|r| !r.success).map(|r| r.block)
    }

    /// `K_i(b)`: messages node `i` knows after block `b` (`b = 0` gives the
    /// empty set). Decodes count only in blocks where the node succeeded.
    pub fn knowledge(&self, i: NodeId, b: usize) -> BTreeSet<Message> {
        let mut known: BTreeSet<Message> = (1..=b).map(|c| Message::new(i, c)).collect();
        for c in 1..=b.min(self.block_count()) {
            let r = self.record(i, c);
            if r.success {
                known.extend(r.decoded.iter().copied());
            }
        }
        known
    }

    /// Block by which node `i` has completed its all-cast: every scheduled
    /// decode up to that block succeeded and the first message of every node
    /// it decodes was due by then. `None` if that never happens within the
    /// run.
    pub fn completion_block(&self, i: NodeId) -> Option<usize> {
        let last_due = (1..=self.schedule.horizon())
            .rev()
            .find(|&k| !self.schedule.decode(i, k).is_empty())
            .unwrap_or(1);
        if last_due > self.block_count() {
            return None;
        }
        (1..=last_due).all(|b| self.record(i, b).success).then_some(last_due)
    }

    /// First block after which node `i` actually knows the first message of
    /// every node it decodes (extra early decodes included).
    pub fn earliest_full_knowledge(&self, i: NodeId) -> Option<usize> {
        let targets = self.schedule.decoded_by(i);
        let mut known = BTreeSet::new();
        for b in 1..=self.block_count() {
            let r = self.record(i, b);
            if r.success {
                known.extend(r.decoded.iter().filter(|m| m.block == 1).map(|m| m.node));
            }
            if targets.iter().all(|j| known.contains(j)) {
                return Some(b);
            }
        }
        None
    }

    /// One row per (block, node), 1-based ids. Message lists are
    /// space-separated `node@block` tokens.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,node,success,scheduled,decoded,bundle,relay_gaps,fresh_shape\n");
        let list = |ms: &[Message]| ms.iter().map(Message::to_string).collect::<Vec<_>>().join(" ");
        for r in self.records() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.block,
                r.node + 1,
                r.success,
                list(&r.scheduled),
                list(&r.decoded),
                list(&r.bundle),
                list(&r.relay_gaps),
                r.fresh_shape.map_or(String::new(), |s| s.to_string()),
            ));
        }
        out
    }

    /// Structured form with 1-based ids.
    pub fn to_json(&self) -> Value {
        let n = self.node_count();
        let nodes: Vec<Value> = (0..n)
            .map(|i| {
                json!({
                    "node": i + 1,
                    "sum_rate_condition": self.sum_rate_ok[i],
                    "completion_block": self.completion_block(i),
                    "earliest_full_knowledge": self.earliest_full_knowledge(i),
                })
            })
            .collect();
        let blocks: Vec<Value> = self
            .records
            .iter()
            .enumerate()
            .map(|(b, row)| {
                json!({
                    "block": b + 1,
                    "nodes": row.iter().map(|r| json!({
                        "node": r.node + 1,
                        "success": r.success,
                        "scheduled": r.scheduled,
                        "decoded": r.decoded,
                        "bundle": r.bundle,
                        "relay_gaps": r.relay_gaps,
                        "fresh_shape": r.fresh_shape,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "nodes": nodes,
            "blocks": blocks,
            "warnings": self.warnings,
        })
    }
}

/// Transmitters a node never decodes and their total power at that node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferenceReport {
    pub node: NodeId,
    pub undecoded: NodeSet,
    pub power: f64,
}

pub fn interference_accounting(trace: &SimulationTrace) -> Vec<InterferenceReport> {
    let n = trace.node_count();
    (0..n)
        .map(|i| {
            let decoded = trace.schedule.decoded_by(i);
            let undecoded: NodeSet = (0..n).filter(|&j| j != i && !decoded.contains(&j)).collect();
            let power = trace.powers.sum_at(&undecoded, i);
            InterferenceReport {
                node: i,
                undecoded,
                power,
            }
        })
        .collect()
}
