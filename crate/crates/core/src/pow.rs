//! Proof-of-work as a two-state (mining / broadcasting) machine.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::{binary_shannon_entropy, ComplexityError, ComplexityValue, EpsilonMachine};

pub const MINING_STATE: &str = "mining";
pub const BROADCAST_STATE: &str = "broadcasting";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowError {
    #[error("{field} must be a positive finite number, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("hashrate x block time = {0} is below one trial per block")]
    TooFewTrials(f64),
    #[error("difficulty {0} must be at least 1")]
    Difficulty(f64),
    #[error("difficulty {0} drives the target to zero")]
    ZeroTarget(f64),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    PoW,
    PoS,
    Hybrid,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::PoW => "PoW",
            Protocol::PoS => "PoS",
            Protocol::Hybrid => "Hybrid",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pow" => Ok(Protocol::PoW),
            "pos" => Ok(Protocol::PoS),
            "hybrid" | "pow+pos" => Ok(Protocol::Hybrid),
            other => Err(format!("unknown protocol `{other}`")),
        }
    }
}

/// One currency's protocol descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrencyParams {
    pub name: String,
    pub protocol: Protocol,
    /// Seconds between blocks.
    pub block_time: f64,
    /// Network trials (hashes) per second.
    pub hashrate: f64,
}

impl CurrencyParams {
    pub fn new(
        name: impl Into<String>,
        protocol: Protocol,
        block_time: f64,
        hashrate: f64,
    ) -> Result<Self, PowError> {
        let params = Self {
            name: name.into(),
            protocol,
            block_time,
            hashrate,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), PowError> {
        for (field, value) in [("block_time", self.block_time), ("hashrate", self.hashrate)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(PowError::NonPositive { field, value });
            }
        }
        let trials = self.trials_per_block();
        if trials < 1.0 {
            return Err(PowError::TooFewTrials(trials));
        }
        Ok(())
    }

    /// Expected number of trials the network makes per block.
    pub fn trials_per_block(&self) -> f64 {
        self.hashrate * self.block_time
    }
}

/// Probability that a given trial lands in the broadcasting state: `1 / (H * T)`.
///
/// A plain `f64` product keeps ~1e-16 relative error at any magnitude the
/// tables use, so no wider type is needed.
pub fn broadcast_probability(params: &CurrencyParams) -> Result<f64, PowError> {
    params.validate()?;
    Ok(1.0 / params.trials_per_block())
}

pub fn pow_machine(params: &CurrencyParams) -> Result<EpsilonMachine, PowError> {
    let p = broadcast_probability(params)?;
    Ok(EpsilonMachine::two_state(MINING_STATE, BROADCAST_STATE, p)?)
}

pub fn pow_complexity(params: &CurrencyParams) -> Result<ComplexityValue, PowError> {
    Ok(binary_shannon_entropy(broadcast_probability(params)?)?)
}

/// A 256-bit hash target in `(0, MAX_TARGET]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HashTarget(BigUint);

impl HashTarget {
    /// `0x00000000FFFF0000...0000`: 0xFFFF in bytes 4-5 of a 32-byte big-endian word.
    pub fn max() -> Self {
        HashTarget(BigUint::from(0xFFFFu32) << 208u32)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let raw = self.0.to_bytes_be();
        let mut out = [0u8; 32];
        out[32 - raw.len()..].copy_from_slice(&raw);
        out
    }

    /// Chance that a single uniform 256-bit hash falls below this target.
    pub fn success_probability(&self) -> f64 {
        big_to_f64(&self.0) * 2f64.powi(-256)
    }
}

impl fmt::Display for HashTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.to_be_bytes()))
    }
}

fn big_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

/// `floor(MAX_TARGET / difficulty)`, exact for any `f64` difficulty.
pub fn difficulty_to_target(difficulty: f64) -> Result<HashTarget, PowError> {
    if !(difficulty.is_finite() && difficulty >= 1.0) {
        return Err(PowError::Difficulty(difficulty));
    }
    // difficulty = mantissa * 2^exponent exactly.
    let bits = difficulty.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let exponent = raw_exp - 1075;
    let max = HashTarget::max().0;
    let target = if exponent >= 0 {
        max / (BigUint::from(mantissa) << exponent as u64)
    } else {
        (max << (-exponent) as u64) / BigUint::from(mantissa)
    };
    if target.is_zero() {
        return Err(PowError::ZeroTarget(difficulty));
    }
    Ok(HashTarget(target))
}

/// Expected uniform-hash trials to hit the target: `2^256 / target`.
pub fn expected_hashes_per_block(difficulty: f64) -> Result<f64, PowError> {
    let target = difficulty_to_target(difficulty)?;
    Ok(2f64.powi(256) / big_to_f64(target.value()))
}
