//! Two-block multiple access with relaying helpers.
//!
//! Sources in `M1` still have their block-1 message outstanding; sources in
//! `M2` decoded their block-1 message already and now send their block-2
//! message, binned together with the block-1 messages of the `M1` sources
//! they help (`J_i`). Block 1 contributes the `M1` transmissions over plain
//! noise; block 2 contributes the `M2` transmissions with the fresh block-2
//! signals of `M1` acting as noise.

use super::{capacity, strictly_below, Codeword, MacError, MacInstance, MultiBlockMac, Subset};

pub const MAX_TWO_BLOCK_SOURCES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoBlockInstance {
    mac: MacInstance,
    m1: Subset,
    /// `J_i`: block-1 messages source `i` relays in block 2.
    helps: Vec<Subset>,
    /// `I_i`: sources relaying `i`'s block-1 message.
    helped_by: Vec<Subset>,
}

impl TwoBlockInstance {
    /// `helps[i]` is `J_i`; it must be empty for `i` in `M1` and a subset of
    /// `M1` otherwise. `I_i` is derived.
    pub fn new(mac: MacInstance, m1: Subset, helps: Vec<Subset>) -> Result<Self, MacError> {
        let m = mac.source_count();
        let mut helped_by = vec![Subset::empty(); m];
        for (i, j_set) in helps.iter().enumerate() {
            for j in j_set.iter() {
                if j < m {
                    helped_by[j].insert(i);
                }
            }
        }
        Self::from_relations(mac, m1, helps, helped_by)
    }

    /// Takes both directions of the helper relation and checks that
    /// `i in I_j` exactly when `j in J_i`.
    pub fn from_relations(
        mac: MacInstance,
        m1: Subset,
        helps: Vec<Subset>,
        helped_by: Vec<Subset>,
    ) -> Result<Self, MacError> {
        let m = mac.source_count();
        let all = Subset::full(m);
        if !m1.is_subset(all) {
            return Err(MacError::InvalidPartition(format!("M1 = {m1:?} names unknown sources")));
        }
        if helps.len() != m || helped_by.len() != m {
            return Err(MacError::HelperMismatch(format!(
                "expected {m} helper sets, got J: {}, I: {}",
                helps.len(),
                helped_by.len()
            )));
        }
        for (i, help) in helps.iter().enumerate() {
            if m1.contains(i) && !help.is_empty() {
                return Err(MacError::HelperMismatch(format!(
                    "source {i} is in M1 and cannot relay in block 2"
                )));
            }
            if !help.is_subset(m1) {
                return Err(MacError::HelperMismatch(format!(
                    "J_{i} = {help:?} is not contained in M1"
                )));
            }
            for (j, by) in helped_by.iter().enumerate() {
                if help.contains(j) != by.contains(i) {
                    return Err(MacError::HelperMismatch(format!(
                        "J_{i} and I_{j} disagree on whether {i} helps {j}"
                    )));
                }
            }
        }
        Ok(Self {
            mac,
            m1,
            helps,
            helped_by,
        })
    }

    pub fn mac(&self) -> &MacInstance {
        &self.mac
    }

    pub fn m1(&self) -> Subset {
        self.m1
    }

    pub fn m2(&self) -> Subset {
        self.mac.sources().difference(self.m1)
    }

    pub fn helps(&self, i: usize) -> Subset {
        self.helps[i]
    }

    pub fn helped_by(&self, i: usize) -> Subset {
        self.helped_by[i]
    }

    /// `(S_1, S_2)`: `S_1 = S n M1`; `S_2` holds the `M2` members of `S` plus
    /// every `M2` source relaying a member of `S_1`.
    pub fn split(&self, s: Subset) -> (Subset, Subset) {
        let s1 = s.intersection(self.m1);
        let helpers = s1.iter().fold(Subset::empty(), |acc, i| acc.union(self.helped_by[i]));
        let s2 = s.intersection(self.m2()).union(helpers.intersection(self.m2()));
        (s1, s2)
    }

    /// Left- and right-hand side of the two-block constraint for `S`.
    pub fn constraint(&self, s: Subset) -> (f64, f64) {
        let (s1, s2) = self.split(s);
        let noise = self.mac.effective_noise();
        let m1_power = self.mac.sum_power(self.m1);
        let rhs = capacity(self.mac.sum_power(s1) / noise) + capacity(self.mac.sum_power(s2) / (m1_power + noise));
        (self.mac.sum_rate(s), rhs)
    }

    pub fn constraint_holds(&self, s: Subset) -> bool {
        let (lhs, rhs) = self.constraint(s);
        strictly_below(lhs, rhs, self.mac.epsilon())
    }

    /// Every nonempty `S` whose constraint fails.
    pub fn violating_subsets(&self) -> Vec<Subset> {
        self.mac
            .sources()
            .nonempty_subsets()
            .filter(|&s| !self.constraint_holds(s))
            .collect()
    }

    /// The same problem in the general multi-block form: messages are the
    /// outstanding `w_i(1)` (i in M1) and `w_i(2)` (i in M2), one per source.
    pub fn to_multi_block(&self) -> MultiBlockMac {
        let m = self.mac.source_count();
        let mut block1 = Vec::new();
        let mut block2 = Vec::new();
        for i in 0..m {
            let power = self.mac.powers()[i];
            if self.m1.contains(i) {
                block1.push(Codeword::carrying(power, Subset::singleton(i)));
                block2.push(Codeword::opaque(power));
            } else {
                block2.push(Codeword::carrying(power, Subset::singleton(i).union(self.helps[i])));
            }
        }
        MultiBlockMac::new(
            self.mac.rates().to_vec(),
            vec![block1, block2],
            self.mac.effective_noise(),
        )
        .and_then(|mb| mb.with_epsilon(self.mac.epsilon()))
        .expect("validated instance converts")
    }

    /// Chain-rule bookkeeping for a violating set `A`, with the complements
    /// `A^c = M \ A`, `A_1^c = M1 \ A_1`, `A_2^c = M2 \ A_2`.
    pub fn difference_check(&self, a: Subset) -> DifferenceCheck {
        let (a1, a2) = self.split(a);
        let noise = self.mac.effective_noise();
        let m1_power = self.mac.sum_power(self.m1);
        let a1c = self.m1.difference(a1);
        let a2c = self.m2().difference(a2);
        let all = self.mac.sources();
        let full_rhs = self.constraint(all).1;
        let a_rhs = self.constraint(a).1;
        let complement_rhs = capacity(self.mac.sum_power(a1c) / (self.mac.sum_power(a1) + noise))
            + capacity(self.mac.sum_power(a2c) / (self.mac.sum_power(a2) + m1_power + noise));
        DifferenceCheck {
            a,
            full_lhs: self.mac.sum_rate(all),
            full_rhs,
            a_lhs: self.mac.sum_rate(a),
            a_rhs,
            complement_lhs: self.mac.sum_rate(all.difference(a)),
            reduced_lhs: self.mac.sum_rate(a1c.union(a2c)),
            complement_rhs,
        }
    }
}

/// Quantities behind the peeling step of the two-block region: when the
/// full-set constraint holds and `A` violates its own, the difference gives
/// a strict constraint on the complement, which also holds for the smaller
/// set `A_1^c u A_2^c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceCheck {
    pub a: Subset,
    pub full_lhs: f64,
    pub full_rhs: f64,
    pub a_lhs: f64,
    pub a_rhs: f64,
    /// Sum rate over `A^c`.
    pub complement_lhs: f64,
    /// Sum rate over `A_1^c u A_2^c`.
    pub reduced_lhs: f64,
    /// Right-hand side for the complement with the noises raised by `A_1`
    /// and `A_2`.
    pub complement_rhs: f64,
}

impl DifferenceCheck {
    /// `full_rhs - a_rhs - complement_rhs`; zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        self.full_rhs - self.a_rhs - self.complement_rhs
    }
}

/// Whether every nonempty `S` satisfies the two-block constraint.
pub fn two_block_feasible(inst: &TwoBlockInstance) -> Result<bool, MacError> {
    let m = inst.mac.source_count();
    if m > MAX_TWO_BLOCK_SOURCES {
        return Err(MacError::TooManySources {
            what: "two_block_feasible",
            limit: MAX_TWO_BLOCK_SOURCES,
            m,
        });
    }
    Ok(inst.mac.sources().nonempty_subsets().all(|s| inst.constraint_holds(s)))
}
