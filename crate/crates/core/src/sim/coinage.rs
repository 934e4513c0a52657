//! Coin-age kernel search: one attempt per unspent output per second.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coinage::{
    consume_coin_age, continuous_retarget, kernel_target, AgeAccrual, CoinAge, WalletOutput,
};

use super::{rng_for, SimError, SimKind, SimulationReport};

pub const STAKING_STATE: &str = "staking";
pub const BROADCAST_STATE: &str = "broadcasting";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRetarget {
    /// Desired seconds between kernels network-wide.
    pub block_time: f64,
    /// Largest per-block multiplicative change of the target.
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinageScenario {
    pub outputs: Vec<WalletOutput>,
    /// Kernel success probability per attempt per coin-day consumed.
    pub target_per_coinday: f64,
    #[serde(default)]
    pub accrual: AgeAccrual,
    #[serde(default)]
    pub retarget: Option<KernelRetarget>,
}

/// One successful kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEvent {
    pub output_id: u64,
    pub owner: String,
    /// Clock second the kernel was found.
    pub second: u64,
    /// Seconds the output searched before succeeding.
    pub search_seconds: u64,
    pub consumed: CoinAge,
    pub block_height: u64,
}

pub fn simulate_coinage_kernel(
    scenario: &CoinageScenario,
    duration: u64,
    seed: u64,
) -> Result<SimulationReport, SimError> {
    if scenario.outputs.is_empty() {
        return Err(SimError::Config("at least one unspent output is required".into()));
    }
    if scenario.outputs.iter().any(|o| o.spent) {
        return Err(SimError::Config("outputs must start unspent".into()));
    }
    let mut target = scenario.target_per_coinday;
    kernel_target(target, CoinAge(0.0))?;
    if let Some(rt) = scenario.retarget {
        if !(rt.block_time > 0.0 && rt.max_step >= 1.0) {
            return Err(SimError::Config(format!("retarget settings {rt:?}")));
        }
    }

    let mut rng = rng_for(seed);
    let mut report = SimulationReport::empty(SimKind::Coinage, seed, duration, [STAKING_STATE, BROADCAST_STATE]);
    let mut outputs = scenario.outputs.clone();
    for o in &outputs {
        report.wins_per_account.insert(o.owner.clone(), 0);
    }
    let mut next_id = outputs.iter().map(|o| o.id).max().unwrap_or(0) + 1;
    let mut height = 0u64;
    let mut last_block = 0u64;

    for second in 1..=duration {
        let now = second as i64;
        let mut found = false;
        // Successors minted this second start searching next second.
        let live = outputs.len();
        for idx in 0..live {
            if outputs[idx].spent {
                continue;
            }
            report.trials += 1;
            let age = outputs[idx].age_at(now, scenario.accrual);
            let p = kernel_target(target, age)?;
            if p <= 0.0 || rng.gen::<f64>() >= p {
                continue;
            }
            height += 1;
            let search_start = outputs[idx].received_at.max(0) as u64;
            let (record, successor) =
                consume_coin_age(&mut outputs[idx], now, scenario.accrual, height, next_id)?;
            next_id += 1;
            outputs.push(successor);
            report.kernels.push(KernelEvent {
                output_id: record.output_id,
                owner: record.owner.clone(),
                second,
                search_seconds: second - search_start,
                consumed: record.consumed,
                block_height: height,
            });
            *report.wins_per_account.entry(record.owner).or_default() += 1;
            let interval = second - last_block;
            report.block_intervals.push(interval);
            last_block = second;
            found = true;
            if let Some(rt) = scenario.retarget {
                let observed = 1.0 / (interval.max(1) as f64);
                target = continuous_retarget(target, observed, 1.0 / rt.block_time, rt.max_step)?;
            }
        }
        report.occupy(if found { BROADCAST_STATE } else { STAKING_STATE }, 1);
    }
    Ok(report)
}
