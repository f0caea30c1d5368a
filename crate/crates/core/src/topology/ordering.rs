//! Labelings under which a network behaves like a line.

use itertools::Itertools;

use super::{NodeId, Point, Topology};

/// Largest network for which every labeling is tried.
const EXHAUSTIVE_LIMIT: usize = 8;

/// Whether `order` (position -> node) satisfies `d(a,b) <= d(a,c)` for every
/// triple of positions `a < b < c` or `c < b < a`.
pub fn is_distance_ordered(topology: &Topology, order: &[NodeId]) -> bool {
    let n = order.len();
    let d = |p: usize, q: usize| topology.distance(order[p], order[q]);
    for a in 0..n {
        // Moving away from `a` in either direction, distances never shrink.
        for b in a + 1..n {
            for c in b + 1..n {
                if d(a, b) > d(a, c) {
                    return false;
                }
            }
        }
        for b in (0..a).rev() {
            for c in (0..b).rev() {
                if d(a, b) > d(a, c) {
                    return false;
                }
            }
        }
    }
    true
}

/// Finds a labeling (position -> node id) that orders the network by
/// distance, if one exists.
///
/// Up to 8 nodes every permutation is tried in lexicographic order. Larger
/// networks only try the two directions of a sort along the principal axis
/// (or, without coordinates, along the distance from one end of the widest
/// pair).
pub fn distance_ordering_check(topology: &Topology) -> Option<Vec<NodeId>> {
    let n = topology.node_count();
    if n <= EXHAUSTIVE_LIMIT {
        return (0..n)
            .permutations(n)
            .find(|order| is_distance_ordered(topology, order));
    }
    let forward = axis_order(topology);
    let backward: Vec<NodeId> = forward.iter().rev().copied().collect();
    [forward, backward]
        .into_iter()
        .find(|order| is_distance_ordered(topology, order))
}

fn axis_order(topology: &Topology) -> Vec<NodeId> {
    let n = topology.node_count();
    let keys: Vec<f64> = match topology.positions() {
        Some(points) => principal_projection(points),
        None => {
            let (a, _) = (0..n)
                .tuple_combinations()
                .max_by(|&(a, b), &(c, d)| topology.distance(a, b).total_cmp(&topology.distance(c, d)))
                .expect("n >= 2");
            (0..n)
                .map(|j| if j == a { 0.0 } else { topology.distance(a, j) })
                .collect()
        }
    };
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_by(|&i, &j| keys[i].total_cmp(&keys[j]).then(i.cmp(&j)));
    order
}

/// Projection of each point onto the dominant eigenvector of the 2x2
/// covariance matrix.
fn principal_projection(points: &[Point]) -> Vec<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (ux, uy) = (angle.cos(), angle.sin());
    points.iter().map(|p| (p.x - mx) * ux + (p.y - my) * uy).collect()
}
