//! Seeded discrete-event simulators for PoW mining, Nxt forging and
//! coin-age kernels.
//!
//! Every run draws all of its randomness from one `ChaCha8Rng` seeded with
//! the run seed, so identical inputs and seed give bit-identical reports.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coinage::CoinAgeError;
use crate::complexity::{statistical_complexity, ComplexityError, ComplexityValue, EpsilonMachine};
use crate::nxt::{ForgingAccount, NxtError};
use crate::pow::PowError;

pub mod coinage;
pub mod ledger;
pub mod nxt;
pub mod pow;

pub use self::coinage::{simulate_coinage_kernel, CoinageScenario, KernelEvent, KernelRetarget};
pub use self::ledger::{fork_choice, CandidateBlock, LedgerState, MAX_BLOCK_TRANSACTIONS};
pub use self::nxt::{simulate_nxt_forging, ForgingRound, NxtScenario, NxtSimulator};
pub use self::pow::{simulate_pow, PowScenario};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no account has a positive effective balance")]
    NoForger,
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("report has no occupancy to measure")]
    EmptyReport,
    #[error("report accounts {report:?} do not match {given:?}")]
    AccountMismatch {
        report: Vec<String>,
        given: Vec<String>,
    },
    #[error("observers disagreed on the winning candidate at height {0}")]
    Divergence(u64),
    #[error(transparent)]
    Pow(#[from] PowError),
    #[error(transparent)]
    Nxt(#[from] NxtError),
    #[error(transparent)]
    CoinAge(#[from] CoinAgeError),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Pow,
    Nxt,
    Coinage,
}

/// Output of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub kind: SimKind,
    pub seed: u64,
    /// Simulated seconds.
    pub duration: u64,
    /// Seconds between consecutive blocks on the winning chain.
    pub block_intervals: Vec<u64>,
    /// Seconds spent in each machine state; sums to `duration`.
    pub state_occupancy: BTreeMap<String, u64>,
    pub wins_per_account: BTreeMap<String, u64>,
    /// Rounds that produced more than one candidate block.
    pub fork_events: u64,
    /// Bernoulli trials, target checks or kernel attempts evaluated.
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<KernelEvent>,
}

impl SimulationReport {
    fn empty(kind: SimKind, seed: u64, duration: u64, states: [&str; 2]) -> Self {
        Self {
            kind,
            seed,
            duration,
            block_intervals: Vec::new(),
            state_occupancy: states.iter().map(|s| (s.to_string(), 0)).collect(),
            wins_per_account: BTreeMap::new(),
            fork_events: 0,
            trials: 0,
            kernels: Vec::new(),
        }
    }

    pub fn blocks(&self) -> usize {
        self.block_intervals.len()
    }

    pub fn occupancy_total(&self) -> u64 {
        self.state_occupancy.values().sum()
    }

    /// Mean interval over blocks after the first `warmup`.
    pub fn mean_interval(&self, warmup: usize) -> Option<f64> {
        let tail = self.block_intervals.get(warmup..)?;
        if tail.is_empty() {
            return None;
        }
        Some(tail.iter().sum::<u64>() as f64 / tail.len() as f64)
    }

    fn occupy(&mut self, state: &str, seconds: u64) {
        *self.state_occupancy.entry(state.to_string()).or_default() += seconds;
    }
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complexity of the measured state occupancy.
pub fn empirical_complexity(report: &SimulationReport) -> Result<ComplexityValue, SimError> {
    if report.occupancy_total() == 0 {
        return Err(SimError::EmptyReport);
    }
    let (states, counts): (Vec<String>, Vec<u64>) = report
        .state_occupancy
        .iter()
        .map(|(s, &c)| (s.clone(), c))
        .unzip();
    let machine = EpsilonMachine::from_counts(states, &counts)?;
    Ok(statistical_complexity(&machine)?)
}

/// Fraction of winning-chain blocks forged by each account.
pub fn stake_share_estimate(
    report: &SimulationReport,
    accounts: &[ForgingAccount],
) -> Result<BTreeMap<String, f64>, SimError> {
    let given: BTreeSet<&str> = accounts.iter().map(|a| a.label.as_str()).collect();
    let simulated: BTreeSet<&str> = report.wins_per_account.keys().map(String::as_str).collect();
    if given != simulated {
        return Err(SimError::AccountMismatch {
            report: simulated.into_iter().map(String::from).collect(),
            given: given.into_iter().map(String::from).collect(),
        });
    }
    let total: u64 = report.wins_per_account.values().sum();
    if total == 0 {
        return Err(SimError::EmptyReport);
    }
    Ok(report
        .wins_per_account
        .iter()
        .map(|(label, &wins)| (label.clone(), wins as f64 / total as f64))
        .collect())
}
