//! Gaussian multiple-access decodability: one-block capacity region checks,
//! decodable subsets found by exhaustive search or by peeling violated
//! constraints, the two-block region with relaying helpers, and the general
//! multi-block family used by the protocol simulator.
//!
//! All rates are in bits per symbol (log base 2). Every capacity constraint
//! is strict and evaluated as `lhs < rhs - eps`, except that a zero-rate
//! left-hand side is always satisfied: a message carrying no information
//! needs no capacity.

mod multi_block;
mod one_block;
mod subset;
mod two_block;

use thiserror::Error;

pub use multi_block::{kblock_decodable_subset, Codeword, KBlockInstance, KBlockOutcome, MultiBlockMac};
pub use one_block::{
    decodable_subset, is_self_decodable, mac_feasible, peel_decodable_subset, peel_with_trace, subset_margin,
    MAX_EXACT_SOURCES, MAX_FEASIBLE_SOURCES,
};
pub use subset::Subset;
pub use two_block::{two_block_feasible, DifferenceCheck, TwoBlockInstance, MAX_TWO_BLOCK_SOURCES};

/// Default strictness margin in bits.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MacError {
    #[error("{what} supports at most {limit} sources, got {m}")]
    TooManySources { what: &'static str, limit: usize, m: usize },
    #[error("a multiple-access instance needs at least one source")]
    NoSources,
    #[error("rates and powers differ in length ({rates} vs {powers})")]
    LengthMismatch { rates: usize, powers: usize },
    #[error("invalid {what} for source {index}: {value}")]
    InvalidValue {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("noise must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("interference must be nonnegative and finite, got {0}")]
    InvalidInterference(f64),
    #[error("strictness margin must be nonnegative and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("inconsistent helper relation: {0}")]
    HelperMismatch(String),
    #[error("invalid block partition: {0}")]
    InvalidPartition(String),
}

/// `log2(1 + snr)`.
pub fn capacity(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Strict capacity inequality `lhs < rhs` with margin `eps`.
pub fn strictly_below(lhs: f64, rhs: f64, eps: f64) -> bool {
    lhs <= 0.0 || lhs < rhs - eps
}

/// One-block Gaussian multiple-access problem.
///
/// `interference` is extra received power from transmitters the decoder does
/// not try to decode; it adds to the noise in every constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MacInstance {
    rates: Vec<f64>,
    powers: Vec<f64>,
    noise: f64,
    interference: f64,
    eps: f64,
}

impl MacInstance {
    pub fn new(rates: Vec<f64>, powers: Vec<f64>, noise: f64) -> Result<Self, MacError> {
        if rates.is_empty() {
            return Err(MacError::NoSources);
        }
        if rates.len() != powers.len() {
            return Err(MacError::LengthMismatch {
                rates: rates.len(),
                powers: powers.len(),
            });
        }
        if rates.len() > Subset::MAX_SOURCES {
            return Err(MacError::TooManySources {
                what: "a multiple-access instance",
                limit: Subset::MAX_SOURCES,
                m: rates.len(),
            });
        }
        for (what, values) in [("rate", &rates), ("power", &powers)] {
            if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(MacError::InvalidValue { what, index, value });
            }
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(MacError::InvalidNoise(noise));
        }
        Ok(Self {
            rates,
            powers,
            noise,
            interference: 0.0,
            eps: DEFAULT_EPSILON,
        })
    }

    pub fn with_interference(mut self, interference: f64) -> Result<Self, MacError> {
        if !(interference.is_finite() && interference >= 0.0) {
            return Err(MacError::InvalidInterference(interference));
        }
        self.interference = interference;
        Ok(self)
    }

    pub fn with_epsilon(mut self, eps: f64) -> Result<Self, MacError> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(MacError::InvalidEpsilon(eps));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn source_count(&self) -> usize {
        self.rates.len()
    }

    pub fn sources(&self) -> Subset {
        Subset::full(self.source_count())
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn interference(&self) -> f64 {
        self.interference
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// Noise plus external interference.
    pub fn effective_noise(&self) -> f64 {
        self.noise + self.interference
    }

    pub fn sum_rate(&self, s: Subset) -> f64 {
        s.iter().map(|i| self.rates[i]).sum()
    }

    pub fn sum_power(&self, s: Subset) -> f64 {
        s.iter().map(|i| self.powers[i]).sum()
    }

    /// The single sum-rate condition over all sources, which guarantees that
    /// some nonempty subset is decodable.
    pub fn sum_rate_condition(&self) -> bool {
        let all = self.sources();
        strictly_below(
            self.sum_rate(all),
            capacity(self.sum_power(all) / self.effective_noise()),
            self.eps,
        )
    }
}
