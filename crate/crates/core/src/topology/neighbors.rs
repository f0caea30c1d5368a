//! k-hop neighborhoods grown from 1-hop sets.

use super::{NodeId, NodeSet};

/// Per-node sequence of k-hop neighbor sets. `sets[i][k - 1]` holds the nodes
/// that reach `i` in exactly `k` hops; the sequence stops at the last
/// nonempty set, so its length is the node's horizon `L_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborSets {
    sets: Vec<Vec<NodeSet>>,
}

impl NeighborSets {
    pub fn node_count(&self) -> usize {
        self.sets.len()
    }

    /// `N_{i(k)}` for `k >= 1`; empty beyond the horizon.
    pub fn hop(&self, i: NodeId, k: usize) -> NodeSet {
        assert!(k >= 1, "hop index starts at 1");
        self.sets[i].get(k - 1).cloned().unwrap_or_default()
    }

    pub fn hops(&self, i: NodeId) -> &[NodeSet] {
        &self.sets[i]
    }

    /// Horizon `L_i`: the largest `k` with a nonempty `N_{i(k)}`.
    pub fn horizon(&self, i: NodeId) -> usize {
        self.sets[i].len()
    }

    pub fn max_horizon(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Every node that reaches `i` in some number of hops.
    pub fn reachable(&self, i: NodeId) -> NodeSet {
        self.sets[i].iter().flatten().copied().collect()
    }

    /// Hop count at which `j` reaches `i`, if it does.
    pub fn hop_of(&self, i: NodeId, j: NodeId) -> Option<usize> {
        self.sets[i].iter().position(|s| s.contains(&j)).map(|k| k + 1)
    }
}

/// Grows k-hop sets breadth-first: `j` is a k-hop neighbor of `i` when it is a
/// 1-hop neighbor of some (k-1)-hop neighbor of `i` and was not reached
/// earlier.
pub fn k_hop_neighbors(one_hop: &[NodeSet]) -> NeighborSets {
    let sets = (0..one_hop.len())
        .map(|i| {
            let mut seen = NodeSet::from([i]);
            let mut layers: Vec<NodeSet> = Vec::new();
            let mut frontier: NodeSet = one_hop[i].iter().copied().filter(|&j| j != i).collect();
            while !frontier.is_empty() {
                seen.extend(frontier.iter().copied());
                let next: NodeSet = frontier
                    .iter()
                    .flat_map(|&l| one_hop[l].iter().copied())
                    .filter(|j| !seen.contains(j))
                    .collect();
                layers.push(frontier);
                frontier = next;
            }
            layers
        })
        .collect();
    NeighborSets { sets }
}

/// Whether each node's neighborhoods eventually cover every other node.
pub fn coverage_check(neighbors: &NeighborSets, n: usize) -> Vec<bool> {
    (0..neighbors.node_count())
        .map(|i| neighbors.reachable(i).len() == n - 1 && !neighbors.reachable(i).contains(&i))
        .collect()
}
