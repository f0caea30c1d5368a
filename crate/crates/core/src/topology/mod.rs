//! Network geometry, the power-gain model and relay schedules.
//!
//! Nodes are indexed `0..n` internally. Text formats (topology files, CLI
//! output) use 1-based ids.

mod file;
mod gain;
mod neighbors;
mod ordering;
mod schedule;

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use file::{parse_topology, parse_topology_with, render_topology};
pub use gain::GainFunction;
pub use neighbors::{coverage_check, k_hop_neighbors, NeighborSets};
pub use ordering::{distance_ordering_check, is_distance_ordered};
pub use schedule::{validate_schedule, Schedule, ScheduleViolation, ViolationKind};

pub type NodeId = usize;
pub type NodeSet = BTreeSet<NodeId>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("a network needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("transmit power must be positive and finite, got {0}")]
    InvalidPower(f64),
    #[error("noise power must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("invalid gain function: {0}")]
    InvalidGain(String),
    #[error("invalid distance between nodes {i} and {j}: {d}")]
    InvalidDistance { i: NodeId, j: NodeId, d: f64 },
    #[error("distance matrix is {rows}x{cols}, expected {n}x{n}")]
    DistanceShape { rows: usize, cols: usize, n: usize },
    #[error("gain is not non-increasing: g({d_near}) = {g_near} < g({d_far}) = {g_far}")]
    NonMonotoneGain {
        d_near: f64,
        g_near: f64,
        d_far: f64,
        g_far: f64,
    },
    #[error("gain must be finite and nonnegative, got g({d}) = {g}")]
    BadGainValue { d: f64, g: f64 },
    #[error("invalid 1-hop set for node {node}: {reason}")]
    InvalidOneHop { node: NodeId, reason: String },
    #[error("topology is not ordered by distance")]
    NotLineOrdered,
    #[error("topology is not a regular line: {0}")]
    NotRegular(String),
    #[error("topology file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn on_line(x: f64) -> Self {
        Self { x, y: 0.0 }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A wireless network: pairwise distances, a gain model and uniform transmit
/// and noise powers.
#[derive(Debug, Clone)]
pub struct Topology {
    positions: Option<Vec<Point>>,
    distances: Vec<Vec<f64>>,
    gain: GainFunction,
    power: f64,
    noise: f64,
    one_hop: Option<Vec<NodeSet>>,
}

impl Topology {
    pub fn from_positions(
        positions: Vec<Point>,
        gain: GainFunction,
        power: f64,
        noise: f64,
    ) -> Result<Self, TopologyError> {
        let distances = positions
            .iter()
            .map(|a| positions.iter().map(|b| a.distance(b)).collect())
            .collect();
        let topo = Self {
            positions: Some(positions),
            distances,
            gain,
            power,
            noise,
            one_hop: None,
        };
        topo.validate()?;
        Ok(topo)
    }

    /// Builds a topology from a raw distance matrix. The diagonal is ignored.
    pub fn from_distances(
        distances: Vec<Vec<f64>>,
        gain: GainFunction,
        power: f64,
        noise: f64,
    ) -> Result<Self, TopologyError> {
        let n = distances.len();
        for row in &distances {
            if row.len() != n {
                return Err(TopologyError::DistanceShape {
                    rows: n,
                    cols: row.len(),
                    n,
                });
            }
        }
        let topo = Self {
            positions: None,
            distances,
            gain,
            power,
            noise,
            one_hop: None,
        };
        topo.validate()?;
        Ok(topo)
    }

    /// Equally spaced nodes on a line at `0, d0, 2*d0, ...`.
    pub fn regular_line(n: usize, d0: f64, gain: GainFunction, power: f64, noise: f64) -> Result<Self, TopologyError> {
        if !(d0.is_finite() && d0 > 0.0) {
            return Err(TopologyError::InvalidDistance { i: 0, j: 1, d: d0 });
        }
        let xs = (0..n).map(|k| k as f64 * d0).collect();
        Self::line(xs, gain, power, noise)
    }

    /// Nodes on a line at the given coordinates.
    pub fn line(xs: Vec<f64>, gain: GainFunction, power: f64, noise: f64) -> Result<Self, TopologyError> {
        Self::from_positions(xs.into_iter().map(Point::on_line).collect(), gain, power, noise)
    }

    /// `n` nodes evenly spaced on a circle with adjacent chord length `d0`.
    pub fn ring(n: usize, d0: f64, gain: GainFunction, power: f64, noise: f64) -> Result<Self, TopologyError> {
        if n < 2 {
            return Err(TopologyError::TooFewNodes(n));
        }
        let step = std::f64::consts::TAU / n as f64;
        let radius = d0 / (2.0 * (step / 2.0).sin());
        let positions = (0..n)
            .map(|k| {
                let a = k as f64 * step;
                Point::new(radius * a.cos(), radius * a.sin())
            })
            .collect();
        Self::from_positions(positions, gain, power, noise)
    }

    /// `n` nodes on a circular arc of the given radius, adjacent nodes a chord
    /// of `d0` apart. A radius large relative to `n * d0` gives a shallow arc.
    pub fn arc(
        n: usize,
        d0: f64,
        radius: f64,
        gain: GainFunction,
        power: f64,
        noise: f64,
    ) -> Result<Self, TopologyError> {
        if !(radius.is_finite() && radius > d0 / 2.0) {
            return Err(TopologyError::InvalidDistance { i: 0, j: 1, d: radius });
        }
        let step = 2.0 * (d0 / (2.0 * radius)).asin();
        let start = -step * (n as f64 - 1.0) / 2.0;
        let positions = (0..n)
            .map(|k| {
                let a = start + k as f64 * step;
                Point::new(radius * a.sin(), radius * (1.0 - a.cos()))
            })
            .collect();
        Self::from_positions(positions, gain, power, noise)
    }

    /// Attaches explicit 1-hop neighbor sets (used by the distance-regulated
    /// scheme instead of a topology-derived default).
    pub fn with_one_hop(mut self, one_hop: Vec<NodeSet>) -> Result<Self, TopologyError> {
        if one_hop.len() != self.node_count() {
            return Err(TopologyError::InvalidOneHop {
                node: one_hop.len(),
                reason: format!("expected {} sets, got {}", self.node_count(), one_hop.len()),
            });
        }
        for (i, set) in one_hop.iter().enumerate() {
            if set.contains(&i) {
                return Err(TopologyError::InvalidOneHop {
                    node: i,
                    reason: "contains the node itself".into(),
                });
            }
            if let Some(&j) = set.iter().find(|&&j| j >= self.node_count()) {
                return Err(TopologyError::InvalidOneHop {
                    node: i,
                    reason: format!("neighbor {j} out of range"),
                });
            }
        }
        self.one_hop = Some(one_hop);
        Ok(self)
    }

    fn validate(&self) -> Result<(), TopologyError> {
        let n = self.distances.len();
        if n < 2 {
            return Err(TopologyError::TooFewNodes(n));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(TopologyError::InvalidPower(self.power));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return Err(TopologyError::InvalidNoise(self.noise));
        }
        for i in 0..n {
            for j in 0..n {
                let d = self.distances[i][j];
                if i != j && !(d.is_finite() && d > 0.0) {
                    return Err(TopologyError::InvalidDistance { i, j, d });
                }
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.distances.len()
    }

    pub fn distance(&self, i: NodeId, j: NodeId) -> f64 {
        self.distances[i][j]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn positions(&self) -> Option<&[Point]> {
        self.positions.as_deref()
    }

    pub fn gain(&self) -> &GainFunction {
        &self.gain
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn one_hop(&self) -> Option<&[NodeSet]> {
        self.one_hop.as_deref()
    }

    /// The same geometry with a different gain model.
    pub fn with_gain(&self, gain: GainFunction) -> Self {
        Self { gain, ..self.clone() }
    }

    /// Same network with nodes relabeled so that new node `k` is old node
    /// `order[k]`.
    pub fn relabeled(&self, order: &[NodeId]) -> Self {
        let n = self.node_count();
        assert_eq!(order.len(), n, "relabeling must be a permutation");
        let mut inverse = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        Self {
            positions: self.positions.as_ref().map(|p| order.iter().map(|&o| p[o]).collect()),
            distances: order
                .iter()
                .map(|&a| order.iter().map(|&b| self.distances[a][b]).collect())
                .collect(),
            gain: self.gain.clone(),
            power: self.power,
            noise: self.noise,
            one_hop: self.one_hop.as_ref().map(|sets| {
                order
                    .iter()
                    .map(|&o| sets[o].iter().map(|&j| inverse[j]).collect())
                    .collect()
            }),
        }
    }

    /// Short content hash identifying the network in reports.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(render_topology(self).as_bytes());
        let digest = hasher.finalize();
        hex::encode(&digest[..8])
    }

    /// Received powers `|g(d_ij)|^2 * P` for every ordered pair.
    pub fn power_matrix(&self) -> Result<PowerMatrix, TopologyError> {
        build_power_matrix(self)
    }
}

/// `received[i][j]` is the power of node `i`'s signal as received at node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMatrix {
    received: Vec<Vec<f64>>,
}

impl PowerMatrix {
    pub fn node_count(&self) -> usize {
        self.received.len()
    }

    /// Power from transmitter `from` at receiver `to`; zero on the diagonal.
    pub fn get(&self, from: NodeId, to: NodeId) -> f64 {
        if from == to {
            0.0
        } else {
            self.received[from][to]
        }
    }

    /// Total received power at `to` from every other node.
    pub fn total_at(&self, to: NodeId) -> f64 {
        (0..self.node_count())
            .filter(|&i| i != to)
            .map(|i| self.received[i][to])
            .fold(0.0, |acc, p| acc + p)
    }

    /// Sum of powers at `to` from the given transmitters.
    pub fn sum_at<'a>(&self, from: impl IntoIterator<Item = &'a NodeId>, to: NodeId) -> f64 {
        from.into_iter().map(|&i| self.get(i, to)).fold(0.0, |acc, p| acc + p)
    }
}

/// Evaluates the gain model on every pairwise distance.
///
/// Fails when the gain is not non-increasing over the sampled distances or
/// yields a negative or non-finite value.
pub fn build_power_matrix(topology: &Topology) -> Result<PowerMatrix, TopologyError> {
    let n = topology.node_count();
    let gain = topology.gain();

    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = topology.distance(i, j);
                let g = gain.amplitude(d);
                if !(g.is_finite() && g >= 0.0) {
                    return Err(TopologyError::BadGainValue { d, g });
                }
                samples.push((d, g));
            }
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in samples.windows(2) {
        let ((d_near, g_near), (d_far, g_far)) = (w[0], w[1]);
        if g_near < g_far {
            return Err(TopologyError::NonMonotoneGain {
                d_near,
                g_near,
                d_far,
                g_far,
            });
        }
    }

    let received = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        gain.power_gain(topology.distance(i, j)) * topology.power()
                    }
                })
                .collect()
        })
        .collect();
    Ok(PowerMatrix { received })
}

/// Default 1-hop sets for a line-ordered network: each node's neighbors in the
/// distance ordering (one neighbor for the two end nodes).
pub fn line_one_hop(order: &[NodeId]) -> Vec<NodeSet> {
    let n = order.len();
    let mut sets = vec![NodeSet::new(); n];
    for (pos, &node) in order.iter().enumerate() {
        if pos > 0 {
            sets[node].insert(order[pos - 1]);
        }
        if pos + 1 < n {
            sets[node].insert(order[pos + 1]);
        }
    }
    sets
}

/// 1-hop sets of a ring: the two adjacent nodes in index order.
pub fn ring_one_hop(n: usize) -> Vec<NodeSet> {
    (0..n)
        .map(|i| {
            let mut s = NodeSet::new();
            if n > 1 {
                s.insert((i + 1) % n);
                s.insert((i + n - 1) % n);
            }
            s.remove(&i);
            s
        })
        .collect()
}
