//! Omnidirectional decode-and-forward relaying for all-source all-cast
//! wireless networks, analysed at the level of rates and messages.
//!
//! * [`topology`]: geometry, gain model, k-hop neighborhoods and schedules.
//! * [`mac_region`]: Gaussian multiple-access decodability, one block and
//!   several.
//! * [`binning`]: merging messages into one index recoverable with side
//!   information.
//! * [`protocol_sim`]: block-by-block simulation of the relay scheme.
//! * [`rate_analysis`]: the common-rate benchmark, the conditions for
//!   line-ordered networks and bisection for the best admissible rate.
//! * [`cli`]: the `omnirelay` command.

pub mod binning;
pub mod cli;
pub mod mac_region;
pub mod protocol_sim;
pub mod rate_analysis;
pub mod topology;
