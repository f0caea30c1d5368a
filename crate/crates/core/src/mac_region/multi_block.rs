//! Multi-block multiple access.
//!
//! A receiver observes several blocks. In each block every transmitter sends
//! one codeword that bins together a bundle of messages. Relative to a set
//! `C` of messages the receiver is trying to decode, a codeword is
//!
//! * known: every message in its bundle is already known (it is dropped),
//! * involved: its unknown messages all lie in `C`,
//! * noise: it carries some unknown message outside `C` (or is marked
//!   opaque), so its power adds to that block's noise.
//!
//! Decoding `C` jointly requires, for every nonempty `S` in `C`,
//!
//! ```text
//! sum_{w in S} R_w < sum_blocks log2(1 + P_touch(S) / (N + P_noise))
//! ```
//!
//! where `P_touch(S)` is the power of the involved codewords whose bundle
//! meets `S`. The one-block region, the two-block region with helpers and
//! the K-block problem are all special cases.

use super::one_block::{heuristic_family, Peel};
use super::{capacity, strictly_below, MacError, MacInstance, Subset, DEFAULT_EPSILON, MAX_EXACT_SOURCES};
use itertools::Itertools;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codeword {
    /// Received power at the decoder.
    pub power: f64,
    /// Outstanding messages binned into this codeword. Messages the decoder
    /// already knows are left out.
    pub carries: Subset,
    /// Carries something the decoder never targets.
    pub opaque: bool,
}

impl Codeword {
    pub fn carrying(power: f64, carries: Subset) -> Self {
        Self {
            power,
            carries,
            opaque: false,
        }
    }

    pub fn opaque(power: f64) -> Self {
        Self {
            power,
            carries: Subset::empty(),
            opaque: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiBlockMac {
    rates: Vec<f64>,
    blocks: Vec<Vec<Codeword>>,
    noise: f64,
    eps: f64,
}

/// Per-block view of the codewords for a fixed candidate set.
struct Prepared {
    blocks: Vec<(f64, Vec<(f64, u64)>)>,
}

impl Prepared {
    fn rhs(&self, s: Subset) -> f64 {
        let bits = s.bits();
        self.blocks
            .iter()
            .map(|(noise, involved)| {
                let touched: f64 = involved
                    .iter()
                    .filter(|(_, carries)| carries & bits != 0)
                    .map(|(p, _)| p)
                    .sum();
                capacity(touched / noise)
            })
            .sum()
    }
}

impl MultiBlockMac {
    /// `noise` is the receiver noise (plus any external interference) in
    /// every block.
    pub fn new(rates: Vec<f64>, blocks: Vec<Vec<Codeword>>, noise: f64) -> Result<Self, MacError> {
        if rates.len() > Subset::MAX_SOURCES {
            return Err(MacError::TooManySources {
                what: "a multi-block instance",
                limit: Subset::MAX_SOURCES,
                m: rates.len(),
            });
        }
        if let Some((index, &value)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0)) {
            return Err(MacError::InvalidValue {
                what: "rate",
                index,
                value,
            });
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(MacError::InvalidNoise(noise));
        }
        let all = Subset::full(rates.len());
        for (index, cw) in blocks.iter().flatten().enumerate() {
            if !(cw.power.is_finite() && cw.power >= 0.0) {
                return Err(MacError::InvalidValue {
                    what: "codeword power",
                    index,
                    value: cw.power,
                });
            }
            if !cw.carries.is_subset(all) {
                return Err(MacError::InvalidPartition(format!(
                    "codeword carries unknown messages {:?}",
                    cw.carries
                )));
            }
        }
        Ok(Self {
            rates,
            blocks,
            noise,
            eps: DEFAULT_EPSILON,
        })
    }

    pub fn with_epsilon(mut self, eps: f64) -> Result<Self, MacError> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(MacError::InvalidEpsilon(eps));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn message_count(&self) -> usize {
        self.rates.len()
    }

    pub fn messages(&self) -> Subset {
        Subset::full(self.rates.len())
    }

    pub fn blocks(&self) -> &[Vec<Codeword>] {
        &self.blocks
    }

    fn sum_rate(&self, s: Subset) -> f64 {
        s.iter().map(|i| self.rates[i]).sum()
    }

    fn prepare(&self, candidates: Subset) -> Prepared {
        let blocks = self
            .blocks
            .iter()
            .filter_map(|block| {
                let mut noise = self.noise;
                let mut involved = Vec::new();
                for cw in block {
                    if cw.opaque || !cw.carries.is_subset(candidates) {
                        noise += cw.power;
                    } else if !cw.carries.is_empty() {
                        involved.push((cw.power, cw.carries.bits()));
                    }
                }
                (!involved.is_empty()).then_some((noise, involved))
            })
            .collect();
        Prepared { blocks }
    }

    /// `(lhs, rhs)` of the constraint for messages `s` when the decoder
    /// targets `candidates`.
    pub fn constraint(&self, candidates: Subset, s: Subset) -> (f64, f64) {
        (self.sum_rate(s), self.prepare(candidates).rhs(s))
    }

    pub fn constraint_holds(&self, candidates: Subset, s: Subset) -> bool {
        let (lhs, rhs) = self.constraint(candidates, s);
        strictly_below(lhs, rhs, self.eps)
    }

    /// The sum-rate condition over all messages.
    pub fn sum_rate_condition(&self) -> bool {
        let all = self.messages();
        all.is_empty() || self.constraint_holds(all, all)
    }

    fn search_family(&self, c: Subset, prepared: &Prepared) -> Vec<Subset> {
        if c.len() <= MAX_EXACT_SOURCES {
            c.nonempty_subsets().collect()
        } else {
            heuristic_family(
                c,
                |i| self.rates[i],
                |i| {
                    self.blocks
                        .iter()
                        .flatten()
                        .filter(|cw| cw.carries.contains(i))
                        .map(|cw| cw.power)
                        .sum()
                },
                |i| self.rates[i] - prepared.rhs(Subset::singleton(i)),
            )
        }
    }

    /// Whether `c` can be decoded jointly with everything else treated as
    /// noise. Exhaustive up to 16 messages, heuristic beyond.
    pub fn is_self_decodable(&self, c: Subset) -> bool {
        let prepared = self.prepare(c);
        self.search_family(c, &prepared)
            .into_iter()
            .all(|s| strictly_below(self.sum_rate(s), prepared.rhs(s), self.eps))
    }

    /// Peeling recursion starting from `from`: remove the most violating
    /// subset (ties: lexicographically smallest) until the rest is
    /// self-decodable. Removing messages turns the codewords that carry them
    /// into noise, which raises the noise seen by the survivors.
    pub fn peel(&self, from: Subset) -> Peel {
        let mut c = from.intersection(self.messages());
        let mut removed = Vec::new();
        while !c.is_empty() {
            let prepared = self.prepare(c);
            let worst = self
                .search_family(c, &prepared)
                .into_iter()
                .filter_map(|s| {
                    let lhs = self.sum_rate(s);
                    let rhs = prepared.rhs(s);
                    (!strictly_below(lhs, rhs, self.eps)).then_some((lhs - rhs, s))
                })
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

    /// Largest self-decodable subset of `from` (ties: lexicographically
    /// smallest), by exhaustive search.
    pub fn max_decodable_subset(&self, from: Subset) -> Result<Subset, MacError> {
        let members: Vec<usize> = from.intersection(self.messages()).iter().collect();
        if members.len() > MAX_EXACT_SOURCES {
            return Err(MacError::TooManySources {
                what: "max_decodable_subset",
                limit: MAX_EXACT_SOURCES,
                m: members.len(),
            });
        }
        for size in (1..=members.len()).rev() {
            if let Some(found) = members
                .iter()
                .copied()
                .combinations(size)
                .map(Subset::from_iter)
                .find(|&s| self.is_self_decodable(s))
            {
                return Ok(found);
            }
        }
        Ok(Subset::empty())
    }
}

/// K-block decoding problem from one receiver's point of view.
///
/// Source `i` in part `M_k` has its block-`k` message outstanding (all its
/// earlier messages are decoded). Its block-`t` codeword is known for
/// `t < k`, carries `w_i(k)` plus the outstanding messages it relays for
/// `t = k`, and is noise for `t > k` (its fresh messages are not targeted).
#[derive(Debug, Clone, PartialEq)]
pub struct KBlockInstance {
    mac: MacInstance,
    block_of: Vec<usize>,
    helps: Vec<Subset>,
    blocks: usize,
}

impl KBlockInstance {
    /// `parts[k-1]` is `M_k`. `helps[i]` lists the sources whose outstanding
    /// message `i` relays; they must sit in strictly earlier parts.
    pub fn new(mac: MacInstance, parts: Vec<Subset>, helps: Vec<Subset>) -> Result<Self, MacError> {
        let m = mac.source_count();
        if parts.is_empty() {
            return Err(MacError::InvalidPartition("need at least one block".into()));
        }
        if helps.len() != m {
            return Err(MacError::HelperMismatch(format!(
                "expected {m} helper sets, got {}",
                helps.len()
            )));
        }
        let mut block_of = vec![0; m];
        let mut seen = Subset::empty();
        for (k, part) in parts.iter().enumerate() {
            if part.intersects(seen) {
                return Err(MacError::InvalidPartition(format!(
                    "part M_{} overlaps earlier parts",
                    k + 1
                )));
            }
            if !part.is_subset(Subset::full(m)) {
                return Err(MacError::InvalidPartition(format!(
                    "part M_{} names unknown sources",
                    k + 1
                )));
            }
            for i in part.iter() {
                block_of[i] = k + 1;
            }
            seen = seen.union(*part);
        }
        if seen != Subset::full(m) {
            return Err(MacError::InvalidPartition(format!(
                "parts miss sources {:?}",
                Subset::full(m).difference(seen)
            )));
        }
        for (i, h) in helps.iter().enumerate() {
            if h.contains(i) {
                return Err(MacError::HelperMismatch(format!("source {i} cannot relay itself")));
            }
            if let Some(j) = h.iter().find(|&j| j >= m || block_of[j] >= block_of[i]) {
                return Err(MacError::HelperMismatch(format!(
                    "source {i} (block {}) cannot relay source {j}, whose message is not from an earlier block",
                    block_of[i]
                )));
            }
        }
        Ok(Self {
            mac,
            block_of,
            helps,
            blocks: parts.len(),
        })
    }

    /// The two-block instance with `M1`, `M2` and helper sets `J_i`.
    pub fn from_two_block(mac: MacInstance, m1: Subset, helps: Vec<Subset>) -> Result<Self, MacError> {
        let m2 = mac.sources().difference(m1);
        Self::new(mac, vec![m1, m2], helps)
    }

    pub fn mac(&self) -> &MacInstance {
        &self.mac
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// Block index (1-based) of source `i`'s outstanding message.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn to_multi_block(&self) -> MultiBlockMac {
        let m = self.mac.source_count();
        let blocks = (1..=self.blocks)
            .map(|t| {
                (0..m)
                    .filter_map(|i| {
                        let power = self.mac.powers()[i];
                        match self.block_of[i].cmp(&t) {
                            std::cmp::Ordering::Greater => None,
                            std::cmp::Ordering::Equal => {
                                Some(Codeword::carrying(power, Subset::singleton(i).union(self.helps[i])))
                            }
                            std::cmp::Ordering::Less => Some(Codeword::opaque(power)),
                        }
                    })
                    .collect()
            })
            .collect();
        MultiBlockMac::new(self.mac.rates().to_vec(), blocks, self.mac.effective_noise())
            .and_then(|mb| mb.with_epsilon(self.mac.epsilon()))
            .expect("validated instance converts")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KBlockOutcome {
    /// `sum_M R < log2(1 + sum_M P / N)`, which guarantees a nonempty
    /// decodable subset.
    pub sum_rate_ok: bool,
    /// Sources whose outstanding message the peel decodes.
    pub decoded: Subset,
    pub removed: Vec<Subset>,
    /// With more than two blocks the constraint family is this crate's
    /// generalization; the nonemptiness guarantee rests on the sum-rate
    /// condition alone.
    pub guarantee_based: bool,
}

pub fn kblock_decodable_subset(inst: &KBlockInstance) -> KBlockOutcome {
    let mb = inst.to_multi_block();
    let peel = mb.peel(mb.messages());
    KBlockOutcome {
        sum_rate_ok: inst.mac.sum_rate_condition(),
        decoded: peel.decoded,
        removed: peel.removed,
        guarantee_based: inst.blocks > 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac_region::{peel_with_trace, TwoBlockInstance};

    fn set(ids: &[usize]) -> Subset {
        ids.iter().copied().collect()
    }

    #[test]
    fn one_block_reduction_matches_peel() {
        let mac = MacInstance::new(vec![1.0, 1.0, 1.0], vec![4.0, 1.0, 1.0], 1.0).unwrap();
        let kb = KBlockInstance::new(mac.clone(), vec![mac.sources()], vec![Subset::empty(); 3]).unwrap();
        let out = kblock_decodable_subset(&kb);
        let peel = peel_with_trace(&mac);
        assert_eq!(out.decoded, peel.decoded);
        assert_eq!(out.removed, peel.removed);
        assert!(!out.sum_rate_ok);
        assert!(!out.guarantee_based);
    }

    #[test]
    fn relay_pair_decodes_both() {
        let mac = MacInstance::new(vec![0.4, 0.4], vec![1.0, 4.0], 1.0).unwrap();
        let kb = KBlockInstance::from_two_block(mac, set(&[0]), vec![Subset::empty(), set(&[0])]).unwrap();
        let out = kblock_decodable_subset(&kb);
        assert!(out.sum_rate_ok);
        assert_eq!(out.decoded, set(&[0, 1]));
    }

    #[test]
    fn relay_pair_with_fast_first_source() {
        let mac = MacInstance::new(vec![1.2, 0.4], vec![1.0, 4.0], 1.0).unwrap();
        let kb = KBlockInstance::from_two_block(mac.clone(), set(&[0]), vec![Subset::empty(), set(&[0])]).unwrap();
        let out = kblock_decodable_subset(&kb);
        assert!(out.decoded.contains(1));
        assert!(kb.to_multi_block().is_self_decodable(out.decoded));
        // Without relaying, w_1(1) is peeled and w_2(2) survives.
        let bare = KBlockInstance::from_two_block(mac, set(&[0]), vec![Subset::empty(); 2]).unwrap();
        let out = kblock_decodable_subset(&bare);
        assert_eq!(out.decoded, set(&[1]));
        assert_eq!(out.removed, vec![set(&[0])]);
    }

    #[test]
    fn two_block_conversions_agree() {
        let mac = MacInstance::new(vec![0.3, 1.1, 0.7], vec![2.0, 0.5, 3.0], 0.8).unwrap();
        let helps = vec![Subset::empty(), Subset::empty(), set(&[0, 1])];
        let tb = TwoBlockInstance::new(mac.clone(), set(&[0, 1]), helps.clone()).unwrap();
        let kb = KBlockInstance::from_two_block(mac, set(&[0, 1]), helps).unwrap();
        assert_eq!(tb.to_multi_block(), kb.to_multi_block());
    }

    #[test]
    fn partition_is_validated() {
        let mac = MacInstance::new(vec![0.1; 3], vec![1.0; 3], 1.0).unwrap();
        let none = vec![Subset::empty(); 3];
        assert!(KBlockInstance::new(mac.clone(), vec![set(&[0, 1]), set(&[1, 2])], none.clone()).is_err());
        assert!(KBlockInstance::new(mac.clone(), vec![set(&[0]), set(&[1])], none.clone()).is_err());
        assert!(KBlockInstance::new(mac.clone(), vec![], none.clone()).is_err());
        // relaying a message from the same block
        assert!(KBlockInstance::new(
            mac.clone(),
            vec![set(&[0]), set(&[1, 2])],
            vec![Subset::empty(), set(&[2]), Subset::empty()]
        )
        .is_err());
        assert!(KBlockInstance::new(
            mac,
            vec![set(&[0]), set(&[1]), set(&[2])],
            vec![Subset::empty(), set(&[0]), set(&[0, 1])]
        )
        .is_ok());
    }

    #[test]
    fn three_blocks_flagged_guarantee_based() {
        let mac = MacInstance::new(vec![0.2; 3], vec![1.0, 2.0, 3.0], 1.0).unwrap();
        let kb = KBlockInstance::new(
            mac,
            vec![set(&[0]), set(&[1]), set(&[2])],
            vec![Subset::empty(), set(&[0]), set(&[1])],
        )
        .unwrap();
        let out = kblock_decodable_subset(&kb);
        assert!(out.guarantee_based);
        assert!(out.sum_rate_ok);
        assert!(!out.decoded.is_empty());
    }

    #[test]
    fn sum_rate_telescopes_across_blocks() {
        // The full-set right-hand side of any K-block instance equals the
        // one-block sum capacity, whatever the helper pattern.
        let mac = MacInstance::new(vec![0.5; 4], vec![1.0, 0.3, 2.0, 0.7], 1.3).unwrap();
        let kb = KBlockInstance::new(
            mac.clone(),
            vec![set(&[0, 3]), set(&[1]), set(&[2])],
            vec![Subset::empty(), set(&[3]), set(&[0, 1]), Subset::empty()],
        )
        .unwrap();
        let mb = kb.to_multi_block();
        let all = mb.messages();
        let (_, rhs) = mb.constraint(all, all);
        assert!((rhs - capacity(mac.sum_power(all) / 1.3)).abs() < 1e-12);
    }

    #[test]
    fn max_decodable_matches_one_block_search() {
        let mac = MacInstance::new(vec![1.0, 1.0, 0.3], vec![4.0, 1.0, 0.5], 1.0).unwrap();
        let kb = KBlockInstance::new(mac.clone(), vec![mac.sources()], vec![Subset::empty(); 3]).unwrap();
        let mb = kb.to_multi_block();
        assert_eq!(
            mb.max_decodable_subset(mb.messages()).unwrap(),
            crate::mac_region::decodable_subset(&mac).unwrap()
        );
    }
}
