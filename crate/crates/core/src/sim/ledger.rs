//! Chain state and its block-application transition.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::nxt::{GenerationSignature, Hit};

use super::SimError;

/// Upper bound on transactions bundled into one block.
pub const MAX_BLOCK_TRANSACTIONS: u16 = 255;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateBlock {
    pub forger: String,
    pub height: u64,
    pub tx_count: u16,
    pub difficulty_contribution: f64,
    /// Seconds on the simulation clock.
    pub timestamp: u64,
    pub hit: Hit,
    pub generation_signature: GenerationSignature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerState {
    pub height: u64,
    pub balances: BTreeMap<String, u64>,
    pub cumulative_difficulty: f64,
    pub generation_signature: GenerationSignature,
}

impl LedgerState {
    pub fn genesis(
        height: u64,
        balances: BTreeMap<String, u64>,
        generation_signature: GenerationSignature,
    ) -> Self {
        Self {
            height,
            balances,
            cumulative_difficulty: 0.0,
            generation_signature,
        }
    }

    /// Cumulative difficulty the chain would have with `block` on top.
    pub fn score_with(&self, block: &CandidateBlock) -> f64 {
        self.cumulative_difficulty + block.difficulty_contribution
    }

    /// The state-transition function: returns the state after `block`.
    pub fn apply_block(&self, block: &CandidateBlock) -> Result<LedgerState, SimError> {
        if block.height != self.height + 1 {
            return Err(SimError::InvalidBlock(format!(
                "height {} does not extend {}",
                block.height, self.height
            )));
        }
        if block.tx_count > MAX_BLOCK_TRANSACTIONS {
            return Err(SimError::InvalidBlock(format!(
                "{} transactions exceed {MAX_BLOCK_TRANSACTIONS}",
                block.tx_count
            )));
        }
        if !(block.difficulty_contribution.is_finite() && block.difficulty_contribution > 0.0) {
            return Err(SimError::InvalidBlock(format!(
                "difficulty contribution {}",
                block.difficulty_contribution
            )));
        }
        if !self.balances.contains_key(&block.forger) {
            return Err(SimError::InvalidBlock(format!("unknown forger {}", block.forger)));
        }
        Ok(LedgerState {
            height: block.height,
            balances: self.balances.clone(),
            cumulative_difficulty: self.score_with(block),
            generation_signature: block.generation_signature,
        })
    }
}

/// Highest resulting cumulative difficulty wins; then lowest hit; then forger label.
pub fn fork_choice<'a>(
    parent: &LedgerState,
    candidates: &'a [CandidateBlock],
) -> Option<&'a CandidateBlock> {
    candidates.iter().min_by(|a, b| compare_candidates(parent, a, b))
}

fn compare_candidates(parent: &LedgerState, a: &CandidateBlock, b: &CandidateBlock) -> Ordering {
    parent
        .score_with(b)
        .total_cmp(&parent.score_with(a))
        .then_with(|| a.hit.cmp(&b.hit))
        .then_with(|| a.forger.cmp(&b.forger))
}
