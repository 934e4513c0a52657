//! Nxt-style proof-of-stake forging mechanics.
//!
//! Every account derives a 64-bit hit from its public key and the current
//! generation signature. Its target grows linearly with the seconds since
//! the last block, `base_target * seconds * effective_balance`, and the
//! account may forge once the target exceeds the hit. The base target is
//! retargeted after every block to hold a 60 second average.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complexity::{binary_shannon_entropy, ComplexityError, ComplexityValue, EpsilonMachine};
use crate::pow::CurrencyParams;

pub const TARGETING_STATE: &str = "targeting";
pub const BROADCAST_STATE: &str = "broadcasting";

pub const KEY_LEN: usize = 32;
pub const HASH_ROUNDS: usize = 8;
/// Smallest qualifying balance, in whole NXT.
pub const MIN_FORGING_BALANCE: u64 = 1000;
/// Confirmations a deposit needs before it counts towards forging.
pub const REQUIRED_CONFIRMATIONS: u64 = 1440;
/// Base target of the genesis block.
pub const GENESIS_BASE_TARGET: f64 = 153_722_867.3;
/// `2^64 / (2 * 60)`.
pub const BASE_TARGET_CAP: f64 = 18_446_744_073_709_551_616.0 / 120.0;
/// Total supply the genesis base target was sized for.
pub const GENESIS_SUPPLY: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NxtError {
    #[error("{what} must be {expected} bytes, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{field} must be a non-negative finite number, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("block-time history needs {expected} positive entries, got {got:?}")]
    History { expected: usize, got: Vec<f64> },
    #[error("target can never exceed hit {hit} at base target {base_target} and balance {balance}")]
    Unreachable {
        hit: u64,
        base_target: f64,
        balance: u64,
    },
    #[error("invalid retarget constants: {0}")]
    Constants(String),
    #[error("invalid currency parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
}

pub type PublicKey = [u8; KEY_LEN];
pub type GenerationSignature = [u8; KEY_LEN];

/// A deposit of whole NXT included at some block height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deposit {
    pub amount: u64,
    pub height: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgingAccount {
    pub label: String,
    #[serde(with = "hex_key")]
    pub public_key: PublicKey,
    pub deposits: Vec<Deposit>,
}

impl ForgingAccount {
    pub fn new(label: impl Into<String>, public_key: PublicKey, deposits: Vec<Deposit>) -> Self {
        Self {
            label: label.into(),
            public_key,
            deposits,
        }
    }

    /// Account whose whole stake was deposited at genesis (height 0).
    pub fn genesis(label: impl Into<String>, stake: u64) -> Self {
        let label = label.into();
        let public_key = derive_public_key(&label);
        Self::new(label, public_key, vec![Deposit { amount: stake, height: 0 }])
    }

    pub fn stake_nxt(&self) -> u64 {
        self.deposits.iter().map(|d| d.amount).sum()
    }
}

/// Deterministic stand-in key: SHA-256 of the label.
pub fn derive_public_key(label: &str) -> PublicKey {
    Sha256::digest(label.as_bytes()).into()
}

mod hex_key {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(key: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(key))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("public key must be 32 bytes"))
    }
}

/// An account's 64-bit hit for one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hit(pub u64);

/// SHA-256 over `public_key || generation_signature`, seven more SHA-256
/// rounds over the running digest, then the first 8 bytes little-endian.
pub fn compute_hit(public_key: &[u8], generation_signature: &[u8]) -> Result<Hit, NxtError> {
    check_len("public key", public_key)?;
    check_len("generation signature", generation_signature)?;
    let mut digest: [u8; 32] = Sha256::new()
        .chain_update(public_key)
        .chain_update(generation_signature)
        .finalize()
        .into();
    for _ in 1..HASH_ROUNDS {
        digest = Sha256::digest(digest).into();
    }
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    Ok(Hit(u64::from_le_bytes(first)))
}

/// Generation signature of the next block: SHA-256 of `forger_key || previous`.
pub fn next_generation_signature(
    forger_key: &PublicKey,
    previous: &GenerationSignature,
) -> GenerationSignature {
    Sha256::new()
        .chain_update(forger_key)
        .chain_update(previous)
        .finalize()
        .into()
}

fn check_len(what: &'static str, bytes: &[u8]) -> Result<(), NxtError> {
    if bytes.len() != KEY_LEN {
        return Err(NxtError::Length {
            what,
            expected: KEY_LEN,
            got: bytes.len(),
        });
    }
    Ok(())
}

/// `T_k`, a non-negative real target.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AccountTarget(pub f64);

pub fn account_target(
    base_target: f64,
    seconds_elapsed: u64,
    effective_balance: u64,
) -> Result<AccountTarget, NxtError> {
    if !(base_target.is_finite() && base_target >= 0.0) {
        return Err(NxtError::Negative {
            field: "base_target",
            value: base_target,
        });
    }
    Ok(AccountTarget(
        base_target * seconds_elapsed as f64 * effective_balance as f64,
    ))
}

/// True iff `target > hit`, compared exactly.
pub fn can_forge(hit: Hit, target: AccountTarget) -> bool {
    let t = target.0;
    if t.is_nan() {
        return false;
    }
    if t >= 18_446_744_073_709_551_616.0 {
        return true;
    }
    if t < 0.0 {
        return false;
    }
    let whole = t.floor() as u64;
    whole > hit.0 || (whole == hit.0 && t > whole as f64)
}

/// Smallest whole second at which the account's target exceeds its hit.
pub fn forge_wait_time(hit: Hit, base_target: f64, balance: u64) -> Result<u64, NxtError> {
    if !(base_target.is_finite() && base_target > 0.0) {
        return Err(NxtError::NonPositive {
            field: "base_target",
            value: base_target,
        });
    }
    if balance == 0 {
        return Err(NxtError::NonPositive {
            field: "balance",
            value: 0.0,
        });
    }
    let forges_at = |s: u64| -> bool {
        account_target(base_target, s, balance)
            .map(|t| can_forge(hit, t))
            .unwrap_or(false)
    };
    let per_second = base_target * balance as f64;
    let estimate = (hit.0 as f64 / per_second).floor() + 1.0;
    if !(estimate.is_finite() && estimate < 1.8e19) {
        return Err(NxtError::Unreachable {
            hit: hit.0,
            base_target,
            balance,
        });
    }
    let mut s = (estimate as u64).max(1);
    while s > 1 && forges_at(s - 1) {
        s -= 1;
    }
    while !forges_at(s) {
        s = s.checked_add(1).ok_or(NxtError::Unreachable {
            hit: hit.0,
            base_target,
            balance,
        })?;
    }
    Ok(s)
}

/// Qualifying balance at block height `now`.
///
/// Only deposits with at least 1440 confirmations count, and the sum must
/// reach 1000 NXT or the account cannot forge at all.
pub fn effective_balance(account: &ForgingAccount, now: u64) -> u64 {
    let confirmed: u64 = account
        .deposits
        .iter()
        .filter(|d| now.saturating_sub(d.height) >= REQUIRED_CONFIRMATIONS && d.height <= now)
        .map(|d| d.amount)
        .sum();
    if confirmed < MIN_FORGING_BALANCE {
        0
    } else {
        confirmed
    }
}

/// Constants of the base-target retargeting rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetargetConstants {
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub gamma: f64,
    pub block_time: f64,
    pub base_target_cap: f64,
}

impl Default for RetargetConstants {
    fn default() -> Self {
        Self {
            max_ratio: 67.0 / 60.0,
            min_ratio: 53.0 / 60.0,
            gamma: 0.64,
            block_time: 60.0,
            base_target_cap: BASE_TARGET_CAP,
        }
    }
}

impl RetargetConstants {
    pub fn validate(&self) -> Result<(), NxtError> {
        let ok = self.max_ratio.is_finite()
            && self.max_ratio >= 1.0
            && self.min_ratio > 0.0
            && self.min_ratio <= 1.0
            && self.gamma.is_finite()
            && self.gamma >= 0.0
            && self.block_time.is_finite()
            && self.block_time > 0.0
            && self.base_target_cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NxtError::Constants(format!("{self:?}")))
        }
    }
}

pub const HISTORY_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseTargetState {
    pub base_target: f64,
    pub prev_base_target: f64,
    /// Most recent block intervals in seconds, oldest first.
    pub recent_block_times: Vec<f64>,
    pub constants: RetargetConstants,
}

impl BaseTargetState {
    /// Fresh state with a history of on-schedule blocks.
    pub fn new(base_target: f64, constants: RetargetConstants) -> Self {
        Self {
            base_target,
            prev_base_target: base_target,
            recent_block_times: vec![constants.block_time; HISTORY_LEN],
            constants,
        }
    }

    pub fn average_block_time(&self) -> f64 {
        self.recent_block_times.iter().sum::<f64>() / self.recent_block_times.len() as f64
    }

    /// Appends an interval, dropping the oldest beyond the window.
    pub fn record_block_time(mut self, seconds: f64) -> Self {
        self.recent_block_times.push(seconds);
        let excess = self.recent_block_times.len().saturating_sub(HISTORY_LEN);
        self.recent_block_times.drain(..excess);
        self
    }
}

/// Next base target from the average of the last three block times.
///
/// Slow blocks raise the base target by `min(avg / 60, max_ratio)`. Fast
/// blocks lower it by `gamma * (1 - max(avg / 60, min_ratio))`. The result
/// is kept within `[previous / 2, cap]`.
pub fn retarget_base(state: &BaseTargetState) -> Result<BaseTargetState, NxtError> {
    let c = &state.constants;
    c.validate()?;
    if !(state.base_target.is_finite() && state.base_target > 0.0) {
        return Err(NxtError::NonPositive {
            field: "base_target",
            value: state.base_target,
        });
    }
    if state.recent_block_times.len() != HISTORY_LEN
        || state.recent_block_times.iter().any(|t| !(t.is_finite() && *t > 0.0))
    {
        return Err(NxtError::History {
            expected: HISTORY_LEN,
            got: state.recent_block_times.clone(),
        });
    }
    let previous = state.base_target;
    let ratio = state.average_block_time() / c.block_time;
    let proposed = if ratio > 1.0 {
        previous * ratio.min(c.max_ratio)
    } else {
        previous * (1.0 - c.gamma * (1.0 - ratio.max(c.min_ratio)))
    };
    let floor = previous / 2.0;
    let next = proposed.max(floor).min(c.base_target_cap.max(floor));
    Ok(BaseTargetState {
        base_target: next,
        prev_base_target: previous,
        recent_block_times: state.recent_block_times.clone(),
        constants: state.constants,
    })
}

/// Per-second targeting / broadcasting machine for a given block time.
pub fn nxt_machine(block_time: f64) -> Result<EpsilonMachine, NxtError> {
    if !(block_time.is_finite() && block_time > 0.0) {
        return Err(NxtError::NonPositive {
            field: "block_time",
            value: block_time,
        });
    }
    Ok(EpsilonMachine::two_state(
        TARGETING_STATE,
        BROADCAST_STATE,
        1.0 / block_time,
    )?)
}

pub fn nxt_complexity(block_time: f64) -> Result<ComplexityValue, NxtError> {
    if !(block_time.is_finite() && block_time > 0.0) {
        return Err(NxtError::NonPositive {
            field: "block_time",
            value: block_time,
        });
    }
    Ok(binary_shannon_entropy(1.0 / block_time)?)
}

/// Table-level complexity of a PoS row, reading `hashrate` as target
/// evaluations per second (1.0 for Nxt).
pub fn pos_complexity(params: &CurrencyParams) -> Result<ComplexityValue, NxtError> {
    params.validate().map_err(|e| NxtError::Params(e.to_string()))?;
    nxt_complexity(params.trials_per_block())
}
