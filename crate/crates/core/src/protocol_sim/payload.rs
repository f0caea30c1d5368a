//! Replays a trace with concrete integer messages: every transmission is the
//! modular-sum bin of its bundle, and every decode the trace reports is
//! redone from observed bin indices and the receiver's side information.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::{Message, SimulationTrace};
use crate::binning::{build_binning, decode_from_side_info, BinAssignment, BinningError, MAX_EXHAUSTIVE_VECTORS};
use crate::topology::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PayloadError {
    #[error("expected 1 or {n} alphabet sizes, got {got}")]
    SizeCount { n: usize, got: usize },
    #[error("alphabet sizes must be at least 1")]
    ZeroSize,
    #[error("bundle of node {node} in block {block} has {vectors} message vectors, more than {limit}")]
    BundleTooLarge {
        node: usize,
        block: usize,
        vectors: u64,
        limit: u64,
    },
    #[error("node {node} in block {block}: {message} could not be recovered: {reason}")]
    Decode {
        node: usize,
        block: usize,
        message: Message,
        reason: String,
    },
    #[error("node {node} in block {block}: recovered {recovered} for {message}, sent {sent}")]
    Mismatch {
        node: usize,
        block: usize,
        message: Message,
        recovered: u64,
        sent: u64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PayloadReport {
    pub blocks: usize,
    pub transmissions: usize,
    /// Decoded messages checked against ground truth.
    pub verified: usize,
    /// Recovered from a single codeword with one unknown coordinate.
    pub direct: usize,
    /// Recovered only by solving several codewords jointly.
    pub joint: usize,
    /// Not pinned down by the bin indices alone (the alphabet is too small
    /// for the number of unknowns sharing codewords).
    pub ambiguous: usize,
}

impl PayloadReport {
    pub fn all_recovered(&self) -> bool {
        self.ambiguous == 0
    }
}

struct Codeword {
    members: Vec<Message>,
    binning: BinAssignment,
    index: u64,
}

/// `sizes` holds one alphabet size per node, or a single size for all of
/// them. Message values are drawn from a generator seeded with `seed`.
/// Ids in errors are 1-based.
pub fn payload_demo(trace: &SimulationTrace, sizes: &[u64], seed: u64) -> Result<PayloadReport, PayloadError> {
    let n = trace.node_count();
    let blocks = trace.block_count();
    let size_of: Vec<u64> = match sizes.len() {
        1 => vec![sizes[0]; n],
        len if len == n => sizes.to_vec(),
        got => return Err(PayloadError::SizeCount { n, got }),
    };
    if size_of.contains(&0) {
        return Err(PayloadError::ZeroSize);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth: HashMap<Message, u64> = HashMap::new();
    for b in 1..=blocks {
        for (j, &size) in size_of.iter().enumerate() {
            truth.insert(Message::new(j, b), rng.random_range(0..size));
        }
    }

    // codewords[b - 1][t]
    let mut codewords: Vec<Vec<Codeword>> = Vec::with_capacity(blocks);
    for b in 1..=blocks {
        let mut row = Vec::with_capacity(n);
        for t in 0..n {
            let members = trace.record(t, b).bundle.clone();
            let alphabet: Vec<u64> = members.iter().map(|m| size_of[m.node]).collect();
            let vectors = alphabet
                .iter()
                .try_fold(1u64, |acc, &s| acc.checked_mul(s))
                .unwrap_or(u64::MAX);
            if vectors > MAX_EXHAUSTIVE_VECTORS {
                return Err(PayloadError::BundleTooLarge {
                    node: t + 1,
                    block: b,
                    vectors,
                    limit: MAX_EXHAUSTIVE_VECTORS,
                });
            }
            let binning = build_binning(&alphabet).map_err(|_| PayloadError::ZeroSize)?;
            let values: Vec<u64> = members.iter().map(|m| truth[m]).collect();
            let index = binning.bin(&values);
            row.push(Codeword {
                members,
                binning,
                index,
            });
        }
        codewords.push(row);
    }

    let mut report = PayloadReport {
        blocks,
        transmissions: blocks * n,
        ..PayloadReport::default()
    };
    for i in 0..n {
        let mut values: HashMap<Message, u64> = HashMap::new();
        for b in 1..=blocks {
            let own = Message::new(i, b);
            values.insert(own, truth[&own]);
            let record = trace.record(i, b);
            if !record.success {
                continue;
            }
            let targets: Vec<Message> = record
                .decoded
                .iter()
                .copied()
                .filter(|m| !values.contains_key(m))
                .collect();
            let observed: Vec<&Codeword> = codewords[..b]
                .iter()
                .flat_map(|row| row.iter().enumerate().filter(|&(t, _)| t != i).map(|(_, cw)| cw))
                .collect();
            let mut receiver = Recovery {
                node: i,
                block: b,
                values: &mut values,
                targets: &targets,
                sizes: &size_of,
                report: &mut report,
            };
            receiver.run(&observed, &truth)?;
            for m in &targets {
                let recovered = values[m];
                if recovered != truth[m] {
                    return Err(PayloadError::Mismatch {
                        node: i + 1,
                        block: b,
                        message: *m,
                        recovered,
                        sent: truth[m],
                    });
                }
                report.verified += 1;
            }
        }
    }
    Ok(report)
}

struct Recovery<'a> {
    node: NodeId,
    block: usize,
    values: &'a mut HashMap<Message, u64>,
    targets: &'a [Message],
    sizes: &'a [u64],
    report: &'a mut PayloadReport,
}

impl Recovery<'_> {
    fn unknowns(&self, cw: &Codeword) -> Vec<usize> {
        (0..cw.members.len())
            .filter(|&k| !self.values.contains_key(&cw.members[k]))
            .collect()
    }

    fn error(&self, message: Message, reason: impl ToString) -> PayloadError {
        PayloadError::Decode {
            node: self.node + 1,
            block: self.block,
            message,
            reason: reason.to_string(),
        }
    }

    fn run(&mut self, observed: &[&Codeword], truth: &HashMap<Message, u64>) -> Result<(), PayloadError> {
        // Peel codewords with a single unknown target.
        loop {
            let mut progress = false;
            for cw in observed {
                let unknown = self.unknowns(cw);
                let [k] = unknown[..] else { continue };
                let target = cw.members[k];
                if !self.targets.contains(&target) {
                    continue;
                }
                let known: BTreeMap<usize, u64> = cw
                    .members
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != k)
                    .map(|(c, m)| (c, self.values[m]))
                    .collect();
                let value = decode_from_side_info(&cw.binning, cw.index, &known, k)
                    .map_err(|e: BinningError| self.error(target, e))?;
                self.values.insert(target, value);
                self.report.direct += 1;
                progress = true;
            }
            if !progress {
                break;
            }
        }

        let residual: Vec<Message> = self
            .targets
            .iter()
            .copied()
            .filter(|m| !self.values.contains_key(m))
            .collect();
        if residual.is_empty() {
            return Ok(());
        }
        let relevant: Vec<&Codeword> = observed
            .iter()
            .copied()
            .filter(|cw| {
                let unknown = self.unknowns(cw);
                !unknown.is_empty() && unknown.iter().all(|&k| residual.contains(&cw.members[k]))
            })
            .collect();
        let alphabet: Vec<u64> = residual.iter().map(|m| self.sizes[m.node]).collect();
        let space = alphabet
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s))
            .unwrap_or(u64::MAX);
        if space > MAX_EXHAUSTIVE_VECTORS {
            return Err(self.error(residual[0], format!("{space} joint candidates exceed the search limit")));
        }

        // Every joint assignment consistent with the relevant bin indices.
        let mut consistent: Vec<Vec<u64>> = Vec::new();
        let mut guess = vec![0u64; residual.len()];
        for _ in 0..space {
            let fits = relevant.iter().all(|cw| {
                let vector: Vec<u64> = cw
                    .members
                    .iter()
                    .map(|m| match residual.iter().position(|r| r == m) {
                        Some(p) => guess[p],
                        None => self.values[m],
                    })
                    .collect();
                cw.binning.bin(&vector) == cw.index
            });
            if fits {
                consistent.push(guess.clone());
            }
            for (p, g) in guess.iter_mut().enumerate() {
                *g += 1;
                if *g < alphabet[p] {
                    break;
                }
                *g = 0;
            }
        }
        if consistent.is_empty() {
            return Err(self.error(residual[0], "no message values match the observed bins"));
        }
        for (p, &m) in residual.iter().enumerate() {
            let first = consistent[0][p];
            if consistent.iter().all(|c| c[p] == first) {
                self.values.insert(m, first);
                self.report.joint += 1;
            } else {
                // Keep going with the true value so later blocks stay
                // comparable; the shortfall is reported.
                self.values.insert(m, truth[&m]);
                self.report.ambiguous += 1;
            }
        }
        Ok(())
    }
}
