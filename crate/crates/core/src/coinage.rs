//! Coin-age proof of stake: coin-days, coinstake consumption and kernel targets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complexity::ComplexityValue;
use crate::pow::{pow_complexity, CurrencyParams, PowError};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const DAYS_PER_YEAR: f64 = 365.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoinAgeError {
    #[error("{field} must be {expected}, got {value}")]
    Domain {
        field: &'static str,
        expected: &'static str,
        value: f64,
    },
    #[error("output {0} was already spent")]
    AlreadySpent(u64),
    #[error(transparent)]
    Params(#[from] PowError),
}

fn require(field: &'static str, expected: &'static str, value: f64, ok: bool) -> Result<(), CoinAgeError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(CoinAgeError::Domain { field, expected, value })
    }
}

/// Coin age in coin-days.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoinAge(pub f64);

impl CoinAge {
    pub fn coin_days(self) -> f64 {
        self.0
    }

    pub fn from_coin_years(coin_years: f64) -> Self {
        CoinAge(coin_years * DAYS_PER_YEAR)
    }
}

/// `amount * holding_days`.
pub fn coin_age(amount: f64, holding_days: f64) -> Result<CoinAge, CoinAgeError> {
    require("amount", "positive", amount, amount > 0.0)?;
    require("holding_days", "non-negative", holding_days, holding_days >= 0.0)?;
    Ok(CoinAge(amount * holding_days))
}

/// How holding time is turned into days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeAccrual {
    /// Fractional days.
    #[default]
    Continuous,
    /// Whole days only.
    WholeDays,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalletOutput {
    pub id: u64,
    pub owner: String,
    pub amount: f64,
    /// Seconds on the simulation clock; negative for outputs older than the run.
    pub received_at: i64,
    pub spent: bool,
}

impl WalletOutput {
    pub fn new(id: u64, owner: impl Into<String>, amount: f64, received_at: i64) -> Result<Self, CoinAgeError> {
        require("amount", "positive", amount, amount > 0.0)?;
        Ok(Self {
            id,
            owner: owner.into(),
            amount,
            received_at,
            spent: false,
        })
    }

    pub fn holding_days(&self, now: i64, accrual: AgeAccrual) -> f64 {
        let days = (now - self.received_at).max(0) as f64 / SECONDS_PER_DAY;
        match accrual {
            AgeAccrual::Continuous => days,
            AgeAccrual::WholeDays => days.floor(),
        }
    }

    pub fn age_at(&self, now: i64, accrual: AgeAccrual) -> CoinAge {
        CoinAge(self.amount * self.holding_days(now, accrual))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinstakeRecord {
    pub consumed: CoinAge,
    pub owner: String,
    pub output_id: u64,
    pub block_height: u64,
}

/// Spends `output`, returning the coinstake record and the successor output.
///
/// The successor carries the same amount under `successor_id`, received at
/// `now`, so its age starts again from zero.
pub fn consume_coin_age(
    output: &mut WalletOutput,
    now: i64,
    accrual: AgeAccrual,
    block_height: u64,
    successor_id: u64,
) -> Result<(CoinstakeRecord, WalletOutput), CoinAgeError> {
    if output.spent {
        return Err(CoinAgeError::AlreadySpent(output.id));
    }
    let consumed = output.age_at(now, accrual);
    output.spent = true;
    let record = CoinstakeRecord {
        consumed,
        owner: output.owner.clone(),
        output_id: output.id,
        block_height,
    };
    let successor = WalletOutput {
        id: successor_id,
        owner: output.owner.clone(),
        amount: output.amount,
        received_at: now,
        spent: false,
    };
    Ok((record, successor))
}

/// Kernel hash target: `base_target_per_coinday * coin_days`.
pub fn kernel_target(base_target_per_coinday: f64, consumed: CoinAge) -> Result<f64, CoinAgeError> {
    require(
        "base_target_per_coinday",
        "positive",
        base_target_per_coinday,
        base_target_per_coinday > 0.0,
    )?;
    require("coin age", "non-negative", consumed.0, consumed.0 >= 0.0)?;
    Ok(base_target_per_coinday * consumed.0)
}

/// Expected time to find a kernel, scaled inversely from a reference output.
pub fn expected_kernel_time(consumed: CoinAge, reference: (CoinAge, f64)) -> Result<f64, CoinAgeError> {
    let (ref_age, ref_time) = reference;
    require("coin age", "positive", consumed.0, consumed.0 > 0.0)?;
    require("reference coin age", "positive", ref_age.0, ref_age.0 > 0.0)?;
    require("reference time", "positive", ref_time, ref_time > 0.0)?;
    Ok(ref_time * ref_age.0 / consumed.0)
}

/// Per-block target adjustment toward `desired_rate`.
///
/// The target is scaled by `desired / observed`, limited to
/// `[1 / max_step, max_step]` per call.
pub fn continuous_retarget(
    prev_target: f64,
    observed_rate: f64,
    desired_rate: f64,
    max_step: f64,
) -> Result<f64, CoinAgeError> {
    require("prev_target", "positive", prev_target, prev_target > 0.0)?;
    require("observed_rate", "positive", observed_rate, observed_rate > 0.0)?;
    require("desired_rate", "positive", desired_rate, desired_rate > 0.0)?;
    require("max_step", "at least 1", max_step, max_step >= 1.0)?;
    let step = (desired_rate / observed_rate).clamp(1.0 / max_step, max_step);
    Ok(prev_target * step)
}

/// Table-level complexity of a hybrid or PoS row: the same path as PoW.
pub fn hybrid_complexity(params: &CurrencyParams) -> Result<ComplexityValue, CoinAgeError> {
    Ok(pow_complexity(params)?)
}
