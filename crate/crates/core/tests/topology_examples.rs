use omnirelay::topology::{
    build_power_matrix, coverage_check, distance_ordering_check, is_distance_ordered, k_hop_neighbors, line_one_hop,
    validate_schedule, GainFunction, NodeSet, Point, Schedule, Topology, ViolationKind,
};
use proptest::prelude::*;

fn inv_d() -> GainFunction {
    GainFunction::power_law(2.0).unwrap()
}

fn set(ids: &[usize]) -> NodeSet {
    ids.iter().copied().collect()
}

/// All permutations of `0..n`, independent of the library's enumeration.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// Labeling check straight from the definition: for positions a < b < c
/// (or c < b < a), the distance from a never shrinks.
fn ordered_by_definition(topo: &Topology, order: &[usize]) -> bool {
    let n = order.len();
    let d = |p: usize, q: usize| topo.distance(order[p], order[q]);
    (0..n).all(|a| {
        (0..n).all(|b| {
            (0..n).all(|c| {
                let between = (a < b && b < c) || (c < b && b < a);
                !between || d(a, b) <= d(a, c)
            })
        })
    })
}

fn oracle_orderable(topo: &Topology) -> bool {
    permutations(topo.node_count())
        .iter()
        .any(|o| ordered_by_definition(topo, o))
}

#[test]
fn unit_distance_pair() {
    let topo = Topology::regular_line(2, 1.0, inv_d(), 10.0, 1.0).unwrap();
    let pm = build_power_matrix(&topo).unwrap();
    assert_eq!(pm.get(0, 1), 10.0);
    assert_eq!(pm.get(1, 0), 10.0);
}

#[test]
fn three_node_line_far_pair() {
    let topo = Topology::regular_line(3, 1.0, inv_d(), 10.0, 1.0).unwrap();
    let pm = build_power_matrix(&topo).unwrap();
    // g(2)^2 * 10 = 10 / 4
    assert!((pm.get(0, 2) - 2.5).abs() < 1e-12);
}

#[test]
fn constant_gain_ignores_geometry() {
    let points = vec![
        Point::new(0.0, 0.0),
        Point::new(3.0, 1.0),
        Point::new(-2.0, 7.0),
        Point::new(0.5, 0.5),
    ];
    let topo = Topology::from_positions(points, GainFunction::Constant, 4.0, 1.0).unwrap();
    let pm = build_power_matrix(&topo).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert_eq!(pm.get(i, j), 4.0);
            }
        }
    }
}

#[test]
fn increasing_gain_is_rejected() {
    let rising = GainFunction::custom("rising", |d| d);
    let topo = Topology::regular_line(3, 1.0, rising, 1.0, 1.0).unwrap();
    assert!(build_power_matrix(&topo).is_err());
}

#[test]
fn five_node_line_neighborhoods() {
    let nb = k_hop_neighbors(&line_one_hop(&[0, 1, 2, 3, 4]));
    assert_eq!(nb.hop(0, 1), set(&[1]));
    assert_eq!(nb.hop(0, 2), set(&[2]));
    assert_eq!(nb.hop(0, 3), set(&[3]));
    assert_eq!(nb.hop(0, 4), set(&[4]));
    assert_eq!(nb.horizon(0), 4);
    assert!(coverage_check(&nb, 5).iter().all(|&c| c));
}

#[test]
fn complete_one_hop_sets() {
    let n = 5;
    let one_hop: Vec<NodeSet> = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
    let nb = k_hop_neighbors(&one_hop);
    assert!((0..n).all(|i| nb.horizon(i) == 1));
}

#[test]
fn disconnected_pairs() {
    let nb = k_hop_neighbors(&[set(&[1]), set(&[0]), set(&[3]), set(&[2])]);
    for k in 1..=4 {
        assert!(!nb.hop(0, k).contains(&2) && !nb.hop(0, k).contains(&3));
    }
    assert!(coverage_check(&nb, 4).iter().all(|&c| !c));
}

#[test]
fn two_node_coverage() {
    let nb = k_hop_neighbors(&[set(&[1]), set(&[0])]);
    assert_eq!(coverage_check(&nb, 2), vec![true, true]);
}

#[test]
fn distance_regulated_schedule_is_valid() {
    let nb = k_hop_neighbors(&line_one_hop(&[0, 1, 2, 3]));
    assert_eq!(validate_schedule(&Schedule::distance_regulated(&nb), 4), Ok(()));
}

#[test]
fn encode_outside_decode_is_flagged() {
    let s = Schedule::new(
        vec![vec![set(&[1])], vec![set(&[0])]],
        vec![vec![set(&[1])], vec![set(&[1])]],
    );
    let v = validate_schedule(&s, 2).unwrap_err();
    assert!(v.iter().any(|x| x.node == 1 && x.hop == 1));
}

#[test]
fn overlapping_decode_sets_are_flagged() {
    let s = Schedule::new(
        vec![vec![set(&[1]), set(&[1, 2])], vec![set(&[0])], vec![set(&[0])]],
        vec![vec![], vec![], vec![]],
    );
    let v = validate_schedule(&s, 3).unwrap_err();
    assert!(v
        .iter()
        .any(|x| x.node == 0 && x.hop == 2 && x.kind == ViolationKind::DecodeOverlap && x.offending == set(&[1])));
}

#[test]
fn collinear_points_keep_identity() {
    let topo = Topology::line(vec![0.0, 1.0, 2.0, 3.0], inv_d(), 1.0, 1.0).unwrap();
    assert_eq!(distance_ordering_check(&topo), Some(vec![0, 1, 2, 3]));
}

#[test]
fn shallow_arc_orders_along_the_arc() {
    let topo = Topology::arc(6, 1.0, 12.0, inv_d(), 1.0, 1.0).unwrap();
    let order = distance_ordering_check(&topo).unwrap();
    assert!(ordered_by_definition(&topo, &order));
    assert!(order == vec![0, 1, 2, 3, 4, 5] || order == vec![5, 4, 3, 2, 1, 0]);
}

#[test]
fn equilateral_triangle_matches_exhaustive_oracle() {
    // Any three points satisfy the non-strict condition: each end has one
    // neighbor on the inside, and the middle compares no pair.
    let h = 3f64.sqrt() / 2.0;
    let topo = Topology::from_positions(
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, h)],
        inv_d(),
        1.0,
        1.0,
    )
    .unwrap();
    assert!(oracle_orderable(&topo));
    let order = distance_ordering_check(&topo).unwrap();
    assert!(ordered_by_definition(&topo, &order));
}

#[test]
fn square_has_no_ordering() {
    let topo = Topology::from_positions(
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ],
        inv_d(),
        1.0,
        1.0,
    )
    .unwrap();
    assert!(!oracle_orderable(&topo));
    assert_eq!(distance_ordering_check(&topo), None);
}

#[test]
fn rings_match_exhaustive_oracle() {
    for n in 3..=7 {
        let topo = Topology::ring(n, 1.0, inv_d(), 1.0, 1.0).unwrap();
        assert_eq!(
            distance_ordering_check(&topo).is_some(),
            oracle_orderable(&topo),
            "n={n}"
        );
    }
}

fn gain_strategy() -> impl Strategy<Value = GainFunction> {
    prop_oneof![
        (0.0f64..6.0).prop_map(|a| GainFunction::power_law(a).unwrap()),
        (0.0f64..2.0).prop_map(|g| GainFunction::exponential(g).unwrap()),
        Just(GainFunction::Constant),
    ]
}

proptest! {
    #[test]
    fn power_matrix_is_monotone_in_distance(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..7),
        gain in gain_strategy(),
    ) {
        let points: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        prop_assume!((0..points.len()).all(|i| (i + 1..points.len()).all(|j| points[i].distance(&points[j]) > 1e-6)));
        let topo = Topology::from_positions(points, gain, 2.0, 1.0).unwrap();
        let pm = build_power_matrix(&topo).unwrap();
        let n = topo.node_count();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && i != k && topo.distance(i, j) <= topo.distance(i, k) {
                        prop_assert!(pm.get(j, i) >= pm.get(k, i));
                    }
                }
                if i != j {
                    prop_assert_eq!(pm.get(i, j), pm.get(j, i));
                }
            }
        }
    }

    #[test]
    fn regular_line_neighborhoods_are_symmetric(n in 2usize..12, gain in gain_strategy()) {
        let order: Vec<usize> = (0..n).collect();
        let nb = k_hop_neighbors(&line_one_hop(&order));
        for i in 0..n {
            for k in 1..n {
                let expected: NodeSet = [i.checked_sub(k), Some(i + k).filter(|&j| j < n)].into_iter().flatten().collect();
                prop_assert_eq!(nb.hop(i, k), expected);
            }
        }
        let topo = Topology::regular_line(n, 1.0, gain, 3.0, 1.0).unwrap();
        let pm = build_power_matrix(&topo).unwrap();
        for k in 1..n.saturating_sub(1) {
            prop_assert!(pm.get(0, k) >= pm.get(0, k + 1));
        }
        prop_assert!(is_distance_ordered(&topo, &order));
    }

    #[test]
    fn coverage_matches_reachability(edges in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 6)) {
        let n = edges.len();
        let one_hop: Vec<NodeSet> = (0..n).map(|i| (0..n).filter(|&j| j != i && edges[i][j]).collect()).collect();
        let nb = k_hop_neighbors(&one_hop);
        let cov = coverage_check(&nb, n);
        for i in 0..n {
            // Floyd-style closure over "j in N_{l(1)}" edges into i.
            let mut reach: NodeSet = one_hop[i].clone();
            loop {
                let next: NodeSet = reach.iter().flat_map(|&l| one_hop[l].iter().copied()).chain(reach.iter().copied()).filter(|&j| j != i).collect();
                if next == reach { break; }
                reach = next;
            }
            prop_assert_eq!(cov[i], reach.len() == n - 1);
        }
    }
}
