//! One-block multiple access: region membership, decodable subsets and the
//! peeling recursion.

use itertools::Itertools;

use super::{capacity, strictly_below, MacError, MacInstance, Subset};

/// Exhaustive region check limit (`2^m - 1` constraints).
pub const MAX_FEASIBLE_SOURCES: usize = 24;
/// Exact decodable-subset search limit (about `3^m` constraint evaluations).
pub const MAX_EXACT_SOURCES: usize = 16;

/// Violation margin `sum_S R - log2(1 + sum_S P / noise)` in bits, where the
/// noise is the instance noise plus interference plus `extra_noise`.
/// Negative means the constraint has slack.
pub fn subset_margin(inst: &MacInstance, s: Subset, extra_noise: f64) -> f64 {
    inst.sum_rate(s) - capacity(inst.sum_power(s) / (inst.effective_noise() + extra_noise))
}

fn holds(inst: &MacInstance, s: Subset, noise: f64) -> bool {
    strictly_below(inst.sum_rate(s), capacity(inst.sum_power(s) / noise), inst.epsilon())
}

/// Whether the full rate vector lies strictly inside the capacity region:
/// every nonempty subset satisfies its sum-rate constraint.
pub fn mac_feasible(inst: &MacInstance) -> Result<bool, MacError> {
    let m = inst.source_count();
    if m > MAX_FEASIBLE_SOURCES {
        return Err(MacError::TooManySources {
            what: "mac_feasible",
            limit: MAX_FEASIBLE_SOURCES,
            m,
        });
    }
    let noise = inst.effective_noise();
    Ok(inst.sources().nonempty_subsets().all(|s| holds(inst, s, noise)))
}

/// Whether `s` can be decoded while every source outside `s` is treated as
/// noise: all nonempty `T` in `s` satisfy their constraint with the noise
/// raised by the power of `M \ s`.
///
/// Exhaustive over subsets of `s`; intended for `|s| <= 24`.
pub fn is_self_decodable(inst: &MacInstance, s: Subset) -> bool {
    let noise = inst.effective_noise() + inst.sum_power(inst.sources().difference(s));
    s.nonempty_subsets().all(|t| holds(inst, t, noise))
}

/// Per-mask sums for exhaustive searches.
struct SubsetTable {
    rate: Vec<f64>,
    power: Vec<f64>,
}

impl SubsetTable {
    fn new(inst: &MacInstance) -> Self {
        let m = inst.source_count();
        let size = 1usize << m;
        let mut rate = vec![0.0; size];
        let mut power = vec![0.0; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            rate[mask] = rate[rest] + inst.rates()[low];
            power[mask] = power[rest] + inst.powers()[low];
        }
        Self { rate, power }
    }

    fn self_decodable(&self, inst: &MacInstance, s: Subset) -> bool {
        let all = self.power.len() - 1;
        let outside = self.power[all & !(s.bits() as usize)];
        let noise = inst.effective_noise() + outside;
        s.nonempty_subsets().all(|t| {
            let t = t.bits() as usize;
            strictly_below(self.rate[t], capacity(self.power[t] / noise), inst.epsilon())
        })
    }
}

/// Largest self-decodable subset of the sources, ties broken by the
/// lexicographically smallest id list. Empty when not even a single source
/// can be decoded.
///
/// Whenever the sum-rate condition over all sources holds, the result is
/// nonempty.
pub fn decodable_subset(inst: &MacInstance) -> Result<Subset, MacError> {
    let m = inst.source_count();
    if m > MAX_EXACT_SOURCES {
        return Err(MacError::TooManySources {
            what: "decodable_subset",
            limit: MAX_EXACT_SOURCES,
            m,
        });
    }
    let table = SubsetTable::new(inst);
    for size in (1..=m).rev() {
        // combinations() yields id lists in lexicographic order
        if let Some(found) = (0..m)
            .combinations(size)
            .map(Subset::from_iter)
            .find(|&s| table.self_decodable(inst, s))
        {
            return Ok(found);
        }
    }
    Ok(Subset::empty())
}

/// Subsets of `c` searched for violations when `c` is too large to
/// enumerate: contiguous runs of the index-sorted members plus every prefix
/// of three greedy orders (weakest power first, highest rate first, largest
/// single-source violation first).
pub(crate) fn heuristic_family(
    c: Subset,
    rate: impl Fn(usize) -> f64,
    power: impl Fn(usize) -> f64,
    single_margin: impl Fn(usize) -> f64,
) -> Vec<Subset> {
    let members: Vec<usize> = c.iter().collect();
    let mut family = Vec::new();
    for a in 0..members.len() {
        let mut run = Subset::empty();
        for &m in &members[a..] {
            run.insert(m);
            family.push(run);
        }
    }
    let orders: [Box<dyn Fn(usize) -> f64 + '_>; 3] = [
        Box::new(&power),
        Box::new(|i| -rate(i)),
        Box::new(|i| -single_margin(i)),
    ];
    for key in orders {
        let mut sorted = members.clone();
        sorted.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        let mut prefix = Subset::empty();
        for i in sorted {
            prefix.insert(i);
            family.push(prefix);
        }
    }
    family.sort_by(|a, b| a.lex_cmp(*b));
    family.dedup();
    family
}

/// Result of the peeling recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct Peel {
    pub decoded: Subset,
    /// Violating subsets removed, in order.
    pub removed: Vec<Subset>,
}

/// Peeling recursion: while some subset of the current candidate set `C`
/// violates its constraint (noise raised by the power outside `C`), remove
/// the subset with the largest violation margin (ties: lexicographically
/// smallest). Returns the surviving set, which is self-decodable when the
/// exhaustive search was used (`|M| <= 16`).
pub fn peel_decodable_subset(inst: &MacInstance) -> Subset {
    peel_with_trace(inst).decoded
}

pub fn peel_with_trace(inst: &MacInstance) -> Peel {
    let exact = inst.source_count() <= MAX_EXACT_SOURCES;
    let mut c = inst.sources();
    let mut removed = Vec::new();
    while !c.is_empty() {
        let outside = inst.sum_power(inst.sources().difference(c));
        let noise = inst.effective_noise() + outside;
        let candidates: Vec<Subset> = if exact {
            c.nonempty_subsets().collect()
        } else {
            heuristic_family(
                c,
                |i| inst.rates()[i],
                |i| inst.powers()[i],
                |i| subset_margin(inst, Subset::singleton(i), outside),
            )
        };
        let worst = candidates
            .into_iter()
            .filter(|&s| !holds(inst, s, noise))
            .map(|s| (subset_margin(inst, s, outside), s))
            .max_by(|(ma, a), (mb, b)| ma.total_cmp(mb).then_with(|| b.lex_cmp(*a)));
        match worst {
            None => break,
            Some((_, a)) => {
                c = c.difference(a);
                removed.push(a);
            }
        }
    }
    Peel { decoded: c, removed }
}
