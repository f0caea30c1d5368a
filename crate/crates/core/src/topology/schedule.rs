//! Decode-set / encode-set schedules for block Markov relaying.

use std::fmt;

use serde::Serialize;

use super::{NeighborSets, NodeId, NodeSet};

/// Per node `i` and hop `k` (1-based), the decode-set `D_{i(k)}` (nodes whose
/// block `b-k+1` message `i` decodes at the end of block `b`) and the
/// encode-set `E_{i(k)}` (nodes whose block `b-k` message `i` relays in block
/// `b`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    decode: Vec<Vec<NodeSet>>,
    encode: Vec<Vec<NodeSet>>,
}

impl Schedule {
    /// `decode[i][k-1]` and `encode[i][k-1]`. Shorter lists are padded with
    /// empty sets up to a common horizon.
    pub fn new(mut decode: Vec<Vec<NodeSet>>, mut encode: Vec<Vec<NodeSet>>) -> Self {
        let n = decode.len().max(encode.len());
        decode.resize(n, Vec::new());
        encode.resize(n, Vec::new());
        let horizon = decode.iter().chain(&encode).map(Vec::len).max().unwrap_or(0);
        for lists in decode.iter_mut().chain(encode.iter_mut()) {
            lists.resize(horizon, NodeSet::new());
        }
        Self { decode, encode }
    }

    /// The distance-regulated scheme: `D_{i(k)} = E_{i(k)} = N_{i(k)}`.
    pub fn distance_regulated(neighbors: &NeighborSets) -> Self {
        let sets: Vec<Vec<NodeSet>> = (0..neighbors.node_count())
            .map(|i| neighbors.hops(i).to_vec())
            .collect();
        Self::new(sets.clone(), sets)
    }

    pub fn node_count(&self) -> usize {
        self.decode.len()
    }

    /// Common horizon `L`.
    pub fn horizon(&self) -> usize {
        self.decode.first().map_or(0, Vec::len)
    }

    /// Horizon of one node: last hop with a nonempty decode- or encode-set.
    pub fn node_horizon(&self, i: NodeId) -> usize {
        (1..=self.horizon())
            .rev()
            .find(|&k| !self.decode(i, k).is_empty() || !self.encode(i, k).is_empty())
            .unwrap_or(0)
    }

    /// `D_{i(k)}`; empty for `k` beyond the horizon.
    pub fn decode(&self, i: NodeId, k: usize) -> &NodeSet {
        static EMPTY: NodeSet = NodeSet::new();
        k.checked_sub(1).and_then(|k| self.decode[i].get(k)).unwrap_or(&EMPTY)
    }

    /// `E_{i(k)}`; empty for `k` beyond the horizon.
    pub fn encode(&self, i: NodeId, k: usize) -> &NodeSet {
        static EMPTY: NodeSet = NodeSet::new();
        k.checked_sub(1).and_then(|k| self.encode[i].get(k)).unwrap_or(&EMPTY)
    }

    /// All nodes `i` ever decodes.
    pub fn decoded_by(&self, i: NodeId) -> NodeSet {
        self.decode[i].iter().flatten().copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A decode- or encode-set names a node outside the network.
    OutOfRange,
    /// `i` appears in its own decode-set.
    DecodesSelf,
    /// `D_{i(k)}` intersects an earlier decode-set of `i`.
    DecodeOverlap,
    /// `E_{i(k)}` is not contained in `D_{i(1)} u ... u D_{i(k)}`.
    EncodeNotDecoded,
    /// `E_{i(k)}` intersects an earlier encode-set of `i`.
    EncodeOverlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleViolation {
    pub node: NodeId,
    pub hop: usize,
    pub kind: ViolationKind,
    pub offending: NodeSet,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.offending.iter().map(|j| (j + 1).to_string()).collect();
        write!(
            f,
            "node {} hop {}: {:?} ({})",
            self.node + 1,
            self.hop,
            self.kind,
            ids.join(",")
        )
    }
}

/// Checks the containment chain of every node's decode- and encode-sets and
/// returns every violation found.
pub fn validate_schedule(schedule: &Schedule, n: usize) -> Result<(), Vec<ScheduleViolation>> {
    let mut violations = Vec::new();
    let mut report = |node, hop, kind, offending: NodeSet| {
        if !offending.is_empty() {
            violations.push(ScheduleViolation {
                node,
                hop,
                kind,
                offending,
            });
        }
    };
    for i in 0..schedule.node_count() {
        let mut decoded = NodeSet::new();
        let mut encoded = NodeSet::new();
        for k in 1..=schedule.horizon() {
            let d = schedule.decode(i, k);
            let e = schedule.encode(i, k);
            let out_of_range: NodeSet = d.iter().chain(e).copied().filter(|&j| j >= n).collect();
            report(i, k, ViolationKind::OutOfRange, out_of_range);
            report(
                i,
                k,
                ViolationKind::DecodesSelf,
                d.iter().copied().filter(|&j| j == i).collect(),
            );
            report(
                i,
                k,
                ViolationKind::DecodeOverlap,
                d.intersection(&decoded).copied().collect(),
            );
            decoded.extend(d.iter().copied());
            report(
                i,
                k,
                ViolationKind::EncodeNotDecoded,
                e.difference(&decoded).copied().collect(),
            );
            report(
                i,
                k,
                ViolationKind::EncodeOverlap,
                e.intersection(&encoded).copied().collect(),
            );
            encoded.extend(e.iter().copied());
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}
