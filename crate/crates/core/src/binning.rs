//! Deterministic binning: several messages merged into one bin index that
//! any receiver knowing all but one of them can invert.
//!
//! The modular-sum rule `bin(w) = (w_1 + ... + w_k) mod M` with
//! `M = max_j M_j` works because two values of the missing coordinate that
//! agree mod `M` and both lie in `[0, M_j)` with `M_j <= M` must be equal.
//! For two binary messages it is plain XOR.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Cap on exhaustive property checks.
pub const MAX_EXHAUSTIVE_VECTORS: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinningError {
    #[error("binning needs at least one message")]
    NoMessages,
    #[error("alphabet size of message {0} must be at least 1")]
    ZeroAlphabet(usize),
    #[error("bin count {bins} is smaller than the largest alphabet {largest}")]
    TooFewBins { bins: u64, largest: u64 },
    #[error("{vectors} message vectors exceed the exhaustive limit of {limit}")]
    TooManyVectors { vectors: u64, limit: u64 },
    #[error("bin index {index} is outside 0..{bins}")]
    BinOutOfRange { index: u64, bins: u64 },
    #[error("target coordinate {target} is out of range for {k} messages")]
    BadTarget { target: usize, k: usize },
    #[error("side information must cover every coordinate except the target (missing {0})")]
    IncompleteSideInfo(usize),
    #[error("side information value {value} for coordinate {coordinate} exceeds its alphabet {size}")]
    SideInfoOutOfRange { coordinate: usize, value: u64, size: u64 },
    #[error("side information is inconsistent with the bin: recovered value {recovered} >= alphabet {size}")]
    InconsistentSideInfo { recovered: u64, size: u64 },
    #[error("bin does not determine coordinate {target} uniquely ({candidates} candidates)")]
    Ambiguous { target: usize, candidates: usize },
}

type RuleFn = dyn Fn(&[u64]) -> u64 + Send + Sync;

#[derive(Clone)]
pub enum BinRule {
    ModularSum,
    /// Arbitrary rule, used to exercise the property checker.
    Custom(Arc<RuleFn>),
}

impl fmt::Debug for BinRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ModularSum => write!(f, "ModularSum"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BinAssignment {
    sizes: Vec<u64>,
    bins: u64,
    rule: BinRule,
}

/// Modular-sum binning with `M = max_j M_j` bins.
pub fn build_binning(sizes: &[u64]) -> Result<BinAssignment, BinningError> {
    let bins = validate_sizes(sizes)?;
    Ok(BinAssignment {
        sizes: sizes.to_vec(),
        bins,
        rule: BinRule::ModularSum,
    })
}

fn validate_sizes(sizes: &[u64]) -> Result<u64, BinningError> {
    if sizes.is_empty() {
        return Err(BinningError::NoMessages);
    }
    if let Some(j) = sizes.iter().position(|&s| s == 0) {
        return Err(BinningError::ZeroAlphabet(j));
    }
    Ok(*sizes.iter().max().expect("nonempty"))
}

impl BinAssignment {
    /// A binning with an arbitrary rule and bin count (at least the largest
    /// alphabet).
    pub fn with_rule(
        sizes: &[u64],
        bins: u64,
        rule: impl Fn(&[u64]) -> u64 + Send + Sync + 'static,
    ) -> Result<Self, BinningError> {
        let largest = validate_sizes(sizes)?;
        if bins < largest {
            return Err(BinningError::TooFewBins { bins, largest });
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            bins,
            rule: BinRule::Custom(Arc::new(rule)),
        })
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn bin_count(&self) -> u64 {
        self.bins
    }

    /// Bits needed for the bin index; equals the largest single message.
    pub fn index_bits(&self) -> f64 {
        (self.bins as f64).log2()
    }

    pub fn vector_count(&self) -> u64 {
        self.sizes
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s))
            .unwrap_or(u64::MAX)
    }

    pub fn bin(&self, w: &[u64]) -> u64 {
        debug_assert_eq!(w.len(), self.sizes.len());
        match &self.rule {
            BinRule::ModularSum => w.iter().fold(0u64, |acc, &x| (acc + x % self.bins) % self.bins),
            BinRule::Custom(f) => f(w) % self.bins,
        }
    }

    /// Recovers coordinate `target` from the bin index and the other
    /// coordinates.
    pub fn decode(&self, bin_index: u64, known: &BTreeMap<usize, u64>, target: usize) -> Result<u64, BinningError> {
        decode_from_side_info(self, bin_index, known, target)
    }
}

/// Every message vector in mixed-radix order.
fn vectors(sizes: &[u64]) -> impl Iterator<Item = Vec<u64>> + '_ {
    let mut next = Some(vec![0u64; sizes.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut v = current.clone();
        for (j, &size) in sizes.iter().enumerate() {
            v[j] += 1;
            if v[j] < size {
                next = Some(v);
                break;
            }
            v[j] = 0;
        }
        Some(current)
    })
}

pub fn decode_from_side_info(
    bins: &BinAssignment,
    bin_index: u64,
    known: &BTreeMap<usize, u64>,
    target: usize,
) -> Result<u64, BinningError> {
    let k = bins.sizes.len();
    if target >= k {
        return Err(BinningError::BadTarget { target, k });
    }
    if bin_index >= bins.bins {
        return Err(BinningError::BinOutOfRange {
            index: bin_index,
            bins: bins.bins,
        });
    }
    let mut w = vec![0u64; k];
    for j in (0..k).filter(|&j| j != target) {
        let value = *known.get(&j).ok_or(BinningError::IncompleteSideInfo(j))?;
        if value >= bins.sizes[j] {
            return Err(BinningError::SideInfoOutOfRange {
                coordinate: j,
                value,
                size: bins.sizes[j],
            });
        }
        w[j] = value;
    }
    let size = bins.sizes[target];
    match &bins.rule {
        BinRule::ModularSum => {
            let m = bins.bins;
            let others = w.iter().fold(0u64, |acc, &x| (acc + x) % m);
            let recovered = (bin_index + m - others) % m;
            if recovered >= size {
                return Err(BinningError::InconsistentSideInfo { recovered, size });
            }
            Ok(recovered)
        }
        BinRule::Custom(_) => {
            let candidates: Vec<u64> = (0..size)
                .filter(|&v| {
                    w[target] = v;
                    bins.bin(&w) == bin_index
                })
                .collect();
            match candidates[..] {
                [v] => Ok(v),
                [] => Err(BinningError::InconsistentSideInfo { recovered: size, size }),
                _ => Err(BinningError::Ambiguous {
                    target,
                    candidates: candidates.len(),
                }),
            }
        }
    }
}

/// Exhaustively checks that within every bin no two vectors differ in
/// exactly one coordinate, i.e. the bin index plus any `k-1` coordinates pin
/// down the last one.
pub fn verify_binning_property(bins: &BinAssignment) -> Result<bool, BinningError> {
    let vectors_total = bins.vector_count();
    if vectors_total > MAX_EXHAUSTIVE_VECTORS {
        return Err(BinningError::TooManyVectors {
            vectors: vectors_total,
            limit: MAX_EXHAUSTIVE_VECTORS,
        });
    }
    let k = bins.sizes.len();
    let mut seen: Vec<HashSet<(u64, Vec<u64>)>> = vec![HashSet::new(); k];
    for w in vectors(&bins.sizes) {
        let b = bins.bin(&w);
        for (j, seen_j) in seen.iter_mut().enumerate() {
            let mut rest = w.clone();
            rest.remove(j);
            if !seen_j.insert((b, rest)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive round trip over every vector and every target coordinate.
/// Returns the number of failed recoveries.
pub fn round_trip_failures(bins: &BinAssignment) -> Result<u64, BinningError> {
    let vectors_total = bins.vector_count();
    if vectors_total > MAX_EXHAUSTIVE_VECTORS {
        return Err(BinningError::TooManyVectors {
            vectors: vectors_total,
            limit: MAX_EXHAUSTIVE_VECTORS,
        });
    }
    let mut failures = 0;
    for w in vectors(&bins.sizes) {
        let b = bins.bin(&w);
        for target in 0..w.len() {
            let known: BTreeMap<usize, u64> = w.iter().copied().enumerate().filter(|&(j, _)| j != target).collect();
            if decode_from_side_info(bins, b, &known, target) != Ok(w[target]) {
                failures += 1;
            }
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn known(pairs: &[(usize, u64)]) -> BTreeMap<usize, u64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn binary_pair_is_xor() {
        let b = build_binning(&[2, 2]).unwrap();
        assert_eq!(b.bin_count(), 2);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(b.bin(&[x, y]), x ^ y);
            }
        }
        // knowing w2 = 1 and bin 1 gives w1 = 0
        assert_eq!(b.decode(1, &known(&[(1, 1)]), 0), Ok(0));
    }

    #[test]
    fn single_message_is_identity() {
        let b = build_binning(&[4]).unwrap();
        assert_eq!(b.bin_count(), 4);
        assert!((0..4).all(|w| b.bin(&[w]) == w));
        assert_eq!(b.decode(3, &known(&[]), 0), Ok(3));
    }

    #[test]
    fn unequal_alphabets() {
        let b = build_binning(&[3, 5]).unwrap();
        assert_eq!(b.bin_count(), 5);
        assert_eq!(b.bin(&[2, 4]), 1);
        assert_eq!(b.decode(1, &known(&[(0, 2)]), 1), Ok(4));
        assert_eq!(verify_binning_property(&b), Ok(true));
        assert_eq!(round_trip_failures(&b), Ok(0));
        // w1 = 0 with bin 4 would need w1 = 4 >= 3
        assert_eq!(
            b.decode(4, &known(&[(1, 0)]), 0),
            Err(BinningError::InconsistentSideInfo { recovered: 4, size: 3 })
        );
    }

    #[test]
    fn constant_rule_fails_property() {
        let b = BinAssignment::with_rule(&[2, 2], 2, |_| 0).unwrap();
        assert_eq!(verify_binning_property(&b), Ok(false));
        assert!(matches!(
            b.decode(0, &known(&[(1, 1)]), 0),
            Err(BinningError::Ambiguous { .. })
        ));
    }

    #[test]
    fn input_errors() {
        assert_eq!(build_binning(&[]).unwrap_err(), BinningError::NoMessages);
        assert_eq!(build_binning(&[3, 0]).unwrap_err(), BinningError::ZeroAlphabet(1));
        assert!(matches!(
            BinAssignment::with_rule(&[4], 3, |_| 0),
            Err(BinningError::TooFewBins { .. })
        ));
        let b = build_binning(&[3, 5]).unwrap();
        assert!(matches!(
            b.decode(5, &known(&[(0, 1)]), 1),
            Err(BinningError::BinOutOfRange { .. })
        ));
        assert!(matches!(
            b.decode(0, &known(&[]), 1),
            Err(BinningError::IncompleteSideInfo(0))
        ));
        assert!(matches!(
            b.decode(0, &known(&[(0, 3)]), 1),
            Err(BinningError::SideInfoOutOfRange { .. })
        ));
        assert!(matches!(
            b.decode(0, &known(&[(0, 1)]), 2),
            Err(BinningError::BadTarget { .. })
        ));
        let big = build_binning(&[1000, 1001]).unwrap();
        assert!(matches!(
            verify_binning_property(&big),
            Err(BinningError::TooManyVectors { .. })
        ));
    }

    #[test]
    fn index_costs_no_more_than_largest_message() {
        let b = build_binning(&[3, 8, 5]).unwrap();
        assert_eq!(b.index_bits(), 3.0);
    }

    #[test]
    fn vector_enumeration_is_complete() {
        let all: Vec<Vec<u64>> = vectors(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[5], vec![1, 2]);
    }
}
