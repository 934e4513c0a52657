//! Multi-account Nxt forging on a one-second clock.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nxt::{
    compute_hit, effective_balance, forge_wait_time, next_generation_signature, retarget_base,
    BaseTargetState, ForgingAccount, Hit, RetargetConstants, BROADCAST_STATE, GENESIS_BASE_TARGET,
    GENESIS_SUPPLY, REQUIRED_CONFIRMATIONS, TARGETING_STATE,
};

use super::ledger::{fork_choice, CandidateBlock, LedgerState, MAX_BLOCK_TRANSACTIONS};
use super::{rng_for, SimError, SimKind, SimulationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NxtScenario {
    pub accounts: Vec<ForgingAccount>,
    #[serde(default)]
    pub constants: RetargetConstants,
    /// Starting base target. Defaults to the genesis value rescaled from the
    /// full supply to the stake actually forging.
    #[serde(default)]
    pub initial_base_target: Option<f64>,
}

impl NxtScenario {
    pub fn new(accounts: Vec<ForgingAccount>) -> Self {
        Self {
            accounts,
            constants: RetargetConstants::default(),
            initial_base_target: None,
        }
    }
}

/// Everything decided while producing one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ForgingRound {
    pub height: u64,
    pub base_target: f64,
    /// Generation signature the hits were derived from.
    pub generation_signature: [u8; 32],
    /// Seconds since the previous block at which the first targets crossed.
    pub second: u64,
    /// Per account, in scenario order.
    pub hits: Vec<Hit>,
    pub effective_balances: Vec<u64>,
    pub candidates: Vec<CandidateBlock>,
    pub winner: CandidateBlock,
}

/// Step-wise forging simulator. Each account's hit is fixed per block, its
/// target grows every second, and the first second in which any target
/// exceeds its hit produces candidate blocks.
pub struct NxtSimulator<'a> {
    scenario: &'a NxtScenario,
    rng: ChaCha8Rng,
    ledger: LedgerState,
    base: BaseTargetState,
    clock: u64,
    fork_events: u64,
    trials: u64,
}

impl<'a> NxtSimulator<'a> {
    pub fn new(scenario: &'a NxtScenario, seed: u64) -> Result<Self, SimError> {
        scenario.constants.validate()?;
        if scenario.accounts.is_empty() {
            return Err(SimError::NoForger);
        }
        let mut labels: Vec<&str> = scenario.accounts.iter().map(|a| a.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::Config("account labels must be unique".into()));
        }

        let mut rng = rng_for(seed);
        let mut genesis_signature = [0u8; 32];
        rng.fill(&mut genesis_signature);
        // Genesis deposits at height 0 are matured when forging opens.
        let start = REQUIRED_CONFIRMATIONS;
        let forging_stake: u64 = scenario
            .accounts
            .iter()
            .map(|a| effective_balance(a, start))
            .sum();
        if forging_stake == 0 {
            return Err(SimError::NoForger);
        }
        let base_target = match scenario.initial_base_target {
            Some(bt) if bt.is_finite() && bt > 0.0 => bt,
            Some(bt) => return Err(SimError::Config(format!("initial base target {bt}"))),
            None => GENESIS_BASE_TARGET * GENESIS_SUPPLY / forging_stake as f64,
        };
        let balances: BTreeMap<String, u64> = scenario
            .accounts
            .iter()
            .map(|a| (a.label.clone(), a.stake_nxt()))
            .collect();
        Ok(Self {
            scenario,
            rng,
            ledger: LedgerState::genesis(start, balances, genesis_signature),
            base: BaseTargetState::new(base_target, scenario.constants),
            clock: 0,
            fork_events: 0,
            trials: 0,
        })
    }

    pub fn ledger(&self) -> &LedgerState {
        &self.ledger
    }

    pub fn base_target(&self) -> &BaseTargetState {
        &self.base
    }

    /// Seconds elapsed since the run started.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    /// Forges the next block if it lands at or before `deadline`; otherwise
    /// leaves the simulator untouched and returns `None`.
    pub fn step(&mut self, deadline: u64) -> Result<Option<ForgingRound>, SimError> {
        let height = self.ledger.height + 1;
        let base_target = self.base.base_target;
        let signature = self.ledger.generation_signature;
        let accounts = &self.scenario.accounts;

        let mut hits = Vec::with_capacity(accounts.len());
        let mut balances = Vec::with_capacity(accounts.len());
        let mut waits = Vec::with_capacity(accounts.len());
        for account in accounts {
            let hit = compute_hit(&account.public_key, &signature)?;
            let balance = effective_balance(account, self.ledger.height);
            let wait = if balance > 0 {
                Some(forge_wait_time(hit, base_target, balance)?)
            } else {
                None
            };
            hits.push(hit);
            balances.push(balance);
            waits.push(wait);
        }
        let second = waits.iter().flatten().copied().min().ok_or(SimError::NoForger)?;
        if self.clock.saturating_add(second) > deadline {
            return Ok(None);
        }

        let timestamp = self.clock + second;
        let mut candidates = Vec::new();
        for (i, account) in accounts.iter().enumerate() {
            if waits[i] == Some(second) {
                candidates.push(CandidateBlock {
                    forger: account.label.clone(),
                    height,
                    tx_count: self.rng.gen_range(0..=MAX_BLOCK_TRANSACTIONS),
                    difficulty_contribution: 1.0 / base_target,
                    timestamp,
                    hit: hits[i],
                    generation_signature: next_generation_signature(&account.public_key, &signature),
                });
            }
        }

        let winner = if candidates.len() > 1 {
            self.fork_events += 1;
            self.resolve_fork(&candidates, height)?
        } else {
            candidates[0].clone()
        };

        self.ledger = self.ledger.apply_block(&winner)?;
        self.base = retarget_base(&self.base.clone().record_block_time(second as f64))?;
        self.clock = timestamp;
        self.trials += balances.iter().filter(|&&b| b > 0).count() as u64 * second;

        Ok(Some(ForgingRound {
            height,
            base_target,
            generation_signature: signature,
            second,
            hits,
            effective_balances: balances,
            candidates,
            winner,
        }))
    }

    /// Every account observes the candidates in its own arrival order and
    /// applies the fork-choice rule; all of them must settle on one block.
    fn resolve_fork(&mut self, candidates: &[CandidateBlock], height: u64) -> Result<CandidateBlock, SimError> {
        let mut agreed: Option<CandidateBlock> = None;
        let mut arrival = candidates.to_vec();
        for _ in 0..self.scenario.accounts.len() {
            arrival.shuffle(&mut self.rng);
            let choice = fork_choice(&self.ledger, &arrival).ok_or(SimError::NoForger)?;
            match &agreed {
                None => agreed = Some(choice.clone()),
                Some(prev) if prev == choice => {}
                Some(_) => return Err(SimError::Divergence(height)),
            }
        }
        agreed.ok_or(SimError::NoForger)
    }
}

/// Runs forging for `duration` seconds.
pub fn simulate_nxt_forging(
    scenario: &NxtScenario,
    duration: u64,
    seed: u64,
) -> Result<SimulationReport, SimError> {
    let mut sim = NxtSimulator::new(scenario, seed)?;
    let mut report = SimulationReport::empty(SimKind::Nxt, seed, duration, [TARGETING_STATE, BROADCAST_STATE]);
    for account in &scenario.accounts {
        report.wins_per_account.insert(account.label.clone(), 0);
    }
    while let Some(round) = sim.step(duration)? {
        report.block_intervals.push(round.second);
        report.occupy(TARGETING_STATE, round.second - 1);
        report.occupy(BROADCAST_STATE, 1);
        *report.wins_per_account.entry(round.winner.forger).or_default() += 1;
    }
    report.occupy(TARGETING_STATE, duration - sim.clock());
    report.fork_events = sim.fork_events;
    report.trials = sim.trials;
    Ok(report)
}
