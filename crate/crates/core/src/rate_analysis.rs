//! Common-rate analysis for all-source all-cast: the least-received-power
//! benchmark, the sufficient conditions for line-ordered networks, a
//! numerical check of the argument that regular lines reach the benchmark,
//! and bisection for the largest rate meeting the conditions.
//!
//! Positions below are 1-based positions in the distance ordering of the
//! network, which need not coincide with node ids.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::mac_region::{capacity, strictly_below, DEFAULT_EPSILON};
use crate::topology::{distance_ordering_check, NodeId, PowerMatrix, Topology, TopologyError};

/// The benchmark is the best common rate with independent codebooks and
/// full interference elimination; it is not a proven converse.
pub const BOUND_NOTE: &str = "independent-codebook benchmark, not a proven converse";

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const MAX_BISECTION_STEPS: usize = 60;

/// Relative slack for rate-independent power comparisons.
const POWER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("common rate must be finite and nonnegative, got {0}")]
    InvalidRate(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("at least one sample is required")]
    NoSamples,
}

/// `(1/(n-1)) log2(1 + min_j sum_{i != j} P_ij / N)`.
pub fn allcast_rate_bound(topology: &Topology) -> Result<f64, RateError> {
    let pm = topology.power_matrix()?;
    Ok(bound_from(&pm, topology.noise()))
}

fn bound_from(pm: &PowerMatrix, noise: f64) -> f64 {
    let n = pm.node_count();
    capacity(least_total(pm) / noise) / (n - 1) as f64
}

fn least_total(pm: &PowerMatrix) -> f64 {
    (0..pm.node_count())
        .map(|j| pm.total_at(j))
        .fold(f64::INFINITY, f64::min)
}

/// Which constraint a margin belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintId {
    /// `(n-1) R < log2(1 + least total power / N)`.
    Bound,
    /// Receiver at position `i` with the far-left group `1..=l`.
    Left { i: usize, l: usize },
    /// Receiver at position `i` with the far-right group `r..=n`.
    Right { i: usize, r: usize },
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bound => write!(f, "bound"),
            Self::Left { i, l } => write!(f, "L({i},{l})"),
            Self::Right { i, r } => write!(f, "R({i},{r})"),
        }
    }
}

impl Serialize for ConstraintId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `lhs < rhs`, strict with the default margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: strictly_below(lhs, rhs, DEFAULT_EPSILON),
        }
    }

    /// Slack `rhs - lhs` in bits.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// The two alternatives for one receiver and one far group: decode the far
/// group together with the whole opposite side (`joint`), or decode only
/// the opposite side with the far group as noise (`split`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub constraint: ConstraintId,
    pub node: NodeId,
    pub joint: Inequality,
    pub split: Inequality,
}

impl PairOutcome {
    pub fn holds(&self) -> bool {
        self.joint.holds || self.split.holds
    }

    pub fn margin(&self) -> f64 {
        self.joint.margin().max(self.split.margin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rate: f64,
    pub bound: f64,
    /// Position -> node id.
    pub order: Vec<NodeId>,
    pub bound_check: Inequality,
    pub pairs: Vec<PairOutcome>,
    pub verdict: bool,
}

impl RateReport {
    /// Constraint with the least slack (for a pair, the better of its two
    /// alternatives); the bound wins ties.
    pub fn binding(&self) -> (ConstraintId, f64) {
        self.pairs.iter().map(|p| (p.constraint, p.margin())).fold(
            (ConstraintId::Bound, self.bound_check.margin()),
            |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            },
        )
    }

    pub fn failing(&self) -> impl Iterator<Item = &PairOutcome> {
        self.pairs.iter().filter(|p| !p.holds())
    }
}

/// Prefix sums of received power at one receiver, indexed by position.
struct Line<'a> {
    pm: &'a PowerMatrix,
    order: &'a [NodeId],
}

impl Line<'_> {
    /// Sum of `P_{a,i}` for positions `a` in `from..=to` (1-based).
    fn power(&self, from: usize, to: usize, i: usize) -> f64 {
        (from..=to)
            .map(|a| self.pm.get(self.order[a - 1], self.order[i - 1]))
            .sum()
    }
}

fn validate_rate(rate: f64) -> Result<(), RateError> {
    if rate.is_finite() && rate >= 0.0 {
        Ok(())
    } else {
        Err(RateError::InvalidRate(rate))
    }
}

/// Evaluates the sufficient conditions at common rate `rate`.
///
/// For every interior position `i`, every `l` in `1..=i-2` needs
/// `(l+n-i) R < log2(1 + (P_{1..l} + P_{i+1..n}) / N)` or
/// `(n-i) R < log2(1 + P_{i+1..n} / (P_{1..l} + N))`, and symmetrically every
/// `r` in `i+2..=n`. The end positions only face the bound.
pub fn theorem1_conditions(topology: &Topology, rate: f64) -> Result<RateReport, RateError> {
    validate_rate(rate)?;
    let order = distance_ordering_check(topology).ok_or(TopologyError::NotLineOrdered)?;
    let pm = topology.power_matrix()?;
    Ok(conditions_for(&pm, topology.noise(), order, rate))
}

fn conditions_for(pm: &PowerMatrix, noise: f64, order: Vec<NodeId>, rate: f64) -> RateReport {
    let n = order.len();
    let bound = bound_from(pm, noise);
    let bound_check = Inequality::new((n - 1) as f64 * rate, capacity(least_total(pm) / noise));
    let line = Line { pm, order: &order };
    let mut pairs = Vec::new();
    for i in 2..n {
        let node = order[i - 1];
        let left = line.power(1, i - 1, i);
        let right = line.power(i + 1, n, i);
        for l in 1..i.saturating_sub(1) {
            let far = line.power(1, l, i);
            pairs.push(PairOutcome {
                constraint: ConstraintId::Left { i, l },
                node,
                joint: Inequality::new((l + n - i) as f64 * rate, capacity((far + right) / noise)),
                split: Inequality::new((n - i) as f64 * rate, capacity(right / (far + noise))),
            });
        }
        for r in i + 2..=n {
            let far = line.power(r, n, i);
            pairs.push(PairOutcome {
                constraint: ConstraintId::Right { i, r },
                node,
                joint: Inequality::new((i + n - r) as f64 * rate, capacity((left + far) / noise)),
                split: Inequality::new((i - 1) as f64 * rate, capacity(left / (far + noise))),
            });
        }
    }
    let verdict = bound_check.holds && pairs.iter().all(PairOutcome::holds);
    RateReport {
        rate,
        bound,
        order,
        bound_check,
        pairs,
        verdict,
    }
}

/// Result of the bisection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxRate {
    pub rate: f64,
    pub bound: f64,
    pub steps: usize,
    /// Constraint that stops the rate from growing further.
    pub binding: ConstraintId,
}

/// Largest common rate (within `tol`) at which the conditions hold. The
/// verdict is monotone in the rate, so bisection on `[0, bound]` applies.
pub fn max_achievable_rate(topology: &Topology, tol: f64) -> Result<MaxRate, RateError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(RateError::InvalidTolerance(tol));
    }
    let order = distance_ordering_check(topology).ok_or(TopologyError::NotLineOrdered)?;
    let pm = topology.power_matrix()?;
    let noise = topology.noise();
    let bound = bound_from(&pm, noise);
    let (mut lo, mut hi) = (0.0, bound);
    let mut steps = 0;
    while hi - lo > tol && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if conditions_for(&pm, noise, order.clone(), mid).verdict {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let above = conditions_for(&pm, noise, order, hi);
    let binding = if !above.bound_check.holds {
        ConstraintId::Bound
    } else {
        above
            .failing()
            .min_by(|a, b| a.margin().total_cmp(&b.margin()).then(a.constraint.cmp(&b.constraint)))
            .map_or(ConstraintId::Bound, |p| p.constraint)
    };
    Ok(MaxRate {
        rate: lo,
        bound,
        steps,
        binding,
    })
}

/// A check in the regular-line argument that did not go through.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub rate: f64,
    /// Receiver position (0 for rate-independent checks on the whole line).
    pub position: usize,
    pub constraint: Option<ConstraintId>,
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub bound: f64,
    pub rates: Vec<f64>,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

/// Ordering of a regular line with its spacing, or why it is not one.
fn regular_order(topology: &Topology) -> Result<(Vec<NodeId>, f64), TopologyError> {
    let order = distance_ordering_check(topology).ok_or(TopologyError::NotLineOrdered)?;
    let n = order.len();
    let d0 = topology.distance(order[0], order[1]);
    for a in 0..n {
        for b in a + 1..n {
            let expected = (b - a) as f64 * d0;
            let actual = topology.distance(order[a], order[b]);
            if (actual - expected).abs() > 1e-9 * expected {
                return Err(TopologyError::NotRegular(format!(
                    "positions {} and {} are {actual} apart, expected {expected}",
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    Ok((order, d0))
}

/// Checks numerically that every rate below the benchmark satisfies the
/// sufficient conditions on a regular line, following the argument step by
/// step: received power decreases with hop distance; `k R` stays below the
/// capacity of the `k` strongest signals (by concavity); and for each far
/// group one of the two alternatives is forced, either directly or through
/// the dichotomy on whether the far group alone is decodable.
///
/// Tests `0.999 * bound` and `samples` rates drawn uniformly from
/// `(0, bound)`.
pub fn verify_theorem2(topology: &Topology, samples: usize, seed: u64) -> Result<Theorem2Report, RateError> {
    if samples == 0 {
        return Err(RateError::NoSamples);
    }
    let (order, _) = regular_order(topology)?;
    let n = order.len();
    let pm = topology.power_matrix()?;
    let noise = topology.noise();
    // hop[k] is the power received over k spacings (hop[0] unused)
    let hop: Vec<f64> = (0..n).map(|k| pm.get(order[k], order[0])).collect();
    let sum = |from: usize, to: usize| -> f64 { (from..=to).map(|k| hop[k]).sum() };
    let bound = bound_from(&pm, noise);
    let total = capacity(sum(1, n - 1) / noise);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rates = vec![0.999 * bound];
    rates.extend((0..samples).map(|_| rng.random_range(0.0..1.0) * bound));

    let mut witnesses = Vec::new();
    let mut flag = |rate: f64, position: usize, constraint: Option<ConstraintId>, check: &str| {
        witnesses.push(Witness {
            rate,
            position,
            constraint,
            check: check.to_string(),
        })
    };

    // Rate-independent facts.
    for k in 1..n.saturating_sub(1) {
        if hop[k] < hop[k + 1] {
            flag(
                0.0,
                0,
                None,
                &format!("received power grows from {k} to {} hops", k + 1),
            );
        }
    }
    for k in 1..n {
        let chord = k as f64 / (n - 1) as f64 * total;
        if chord > capacity(sum(1, k) / noise) * (1.0 + POWER_TOLERANCE) {
            flag(0.0, 0, None, &format!("concavity fails for the {k} strongest signals"));
        }
    }

    for &rate in &rates {
        for k in 1..n {
            if !strictly_below(k as f64 * rate, capacity(sum(1, k) / noise), DEFAULT_EPSILON) {
                flag(
                    rate,
                    0,
                    None,
                    &format!("{k} R exceeds the capacity of the {k} strongest signals"),
                );
            }
        }
        let report = conditions_for(&pm, noise, order.clone(), rate);
        if !report.verdict {
            flag(
                rate,
                0,
                report.failing().next().map(|p| p.constraint),
                "conditions fail",
            );
        }
        for i in 2..n {
            for l in 1..i.saturating_sub(1) {
                let id = ConstraintId::Left { i, l };
                for problem in one_side_argument(&hop, noise, n, i, l, rate) {
                    flag(rate, i, Some(id), &problem);
                }
            }
            // The right side is the left side of the mirrored line.
            for r in i + 2..=n {
                let id = ConstraintId::Right { i, r };
                for problem in one_side_argument(&hop, noise, n, n + 1 - i, n + 1 - r, rate) {
                    flag(rate, i, Some(id), &problem);
                }
            }
        }
    }

    Ok(Theorem2Report {
        bound,
        rates,
        holds: witnesses.is_empty(),
        witnesses,
    })
}

/// One far-left group `1..=l` at receiver position `i` of a regular line
/// with per-hop powers `hop`. Returns the steps that failed.
fn one_side_argument(hop: &[f64], noise: f64, n: usize, i: usize, l: usize, rate: f64) -> Vec<String> {
    let sum = |from: usize, to: usize| -> f64 { (from..=to).map(|k| hop[k]).sum() };
    let holds = |lhs: f64, rhs: f64| strictly_below(lhs, rhs, DEFAULT_EPSILON);
    // the far group sits i-l .. i-1 hops away, the right side 1 .. n-i
    let far = sum(i - l, i - 1);
    let right = sum(1, n - i);
    let joint = holds((l + n - i) as f64 * rate, capacity((far + right) / noise));
    let split = holds((n - i) as f64 * rate, capacity(right / (far + noise)));
    let mut problems = Vec::new();
    if i - l <= n - i + 1 {
        // the far group and the right side together are at least as strong as
        // the l+n-i strongest signals
        if far + right < sum(1, n - i + l) * (1.0 - POWER_TOLERANCE) {
            problems.push("power comparison with the strongest signals fails".to_string());
        }
        if !joint {
            problems.push("joint alternative not forced".to_string());
        }
    } else if holds(l as f64 * rate, capacity(far / noise)) {
        if !joint {
            problems.push("far group decodable alone but joint alternative fails".to_string());
        }
    } else {
        let near = sum(1, i - l - 1);
        if !holds((i - 1 - l) as f64 * rate, capacity(near / (far + noise))) {
            problems.push("difference step fails".to_string());
        }
        if !split {
            problems.push("far group not decodable alone but split alternative fails".to_string());
        }
    }
    problems
}
