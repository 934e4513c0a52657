//! Statistical complexity of blockchain consensus protocols.
//!
//! Each protocol is reduced to a two-state machine (searching / broadcasting)
//! whose complexity is the Shannon entropy of its stationary occupancy.
//! Seeded simulators for PoW mining, Nxt-style forging and coin-age kernels
//! produce occupancy traces that can be checked against the closed form.

pub mod coinage;
pub mod complexity;
pub mod nxt;
pub mod pow;
pub mod report;
pub mod scenario;
pub mod sim;

pub use complexity::{binary_shannon_entropy, statistical_complexity, ComplexityValue, EpsilonMachine};
pub use pow::{CurrencyParams, Protocol};
