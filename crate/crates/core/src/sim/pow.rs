use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pow::{CurrencyParams, BROADCAST_STATE, MINING_STATE};

use super::{rng_for, SimError, SimKind, SimulationReport};

pub const NETWORK_MINER: &str = "network";

/// PoW run description. Hashes are aggregated into ticks: each tick
/// succeeds with probability `tick / block_time`, the expected number of
/// successful hashes in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowScenario {
    pub params: CurrencyParams,
    #[serde(default = "one_second")]
    pub tick_seconds: u64,
}

fn one_second() -> u64 {
    1
}

impl PowScenario {
    pub fn tick_probability(&self) -> f64 {
        self.tick_seconds as f64 / self.params.block_time
    }
}

/// Ticks until the next success: geometric on `{1, 2, ...}` with mean `1 / p`.
fn geometric<R: Rng>(rng: &mut R, p: f64, cap: u64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.gen::<f64>();
    let k = (u.ln() / (-p).ln_1p()).floor();
    if k >= cap as f64 {
        cap
    } else {
        1 + k as u64
    }
}

pub fn simulate_pow(scenario: &PowScenario, duration: u64, seed: u64) -> Result<SimulationReport, SimError> {
    let params = &scenario.params;
    params.validate()?;
    let tick = scenario.tick_seconds;
    if tick == 0 {
        return Err(SimError::Config("tick_seconds must be at least 1".into()));
    }
    let p = scenario.tick_probability();
    if p > 1.0 {
        return Err(SimError::Config(format!(
            "block time {} s is shorter than one {tick} s tick",
            params.block_time
        )));
    }
    if (duration as f64) < 10.0 * params.block_time {
        return Err(SimError::Config(format!(
            "duration {duration} s is under ten block times"
        )));
    }
    if !duration.is_multiple_of(tick) {
        return Err(SimError::Config(format!(
            "duration {duration} s is not a whole number of {tick} s ticks"
        )));
    }

    let mut rng = rng_for(seed);
    let mut report = SimulationReport::empty(SimKind::Pow, seed, duration, [MINING_STATE, BROADCAST_STATE]);
    let total_ticks = duration / tick;
    let mut elapsed = 0u64;
    let mut blocks = 0u64;
    loop {
        let remaining = total_ticks - elapsed;
        let wait = geometric(&mut rng, p, remaining + 1);
        if wait > remaining {
            report.occupy(MINING_STATE, remaining * tick);
            elapsed = total_ticks;
            break;
        }
        elapsed += wait;
        blocks += 1;
        report.occupy(MINING_STATE, (wait - 1) * tick);
        report.occupy(BROADCAST_STATE, tick);
        report.block_intervals.push(wait * tick);
    }
    report.trials = elapsed;
    report.wins_per_account.insert(NETWORK_MINER.into(), blocks);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pow::Protocol;

    fn scenario(block_time: f64) -> PowScenario {
        PowScenario {
            params: CurrencyParams::new("test", Protocol::PoW, block_time, 1e6).unwrap(),
            tick_seconds: 1,
        }
    }

    #[test]
    fn deterministic() {
        let s = scenario(30.0);
        assert_eq!(simulate_pow(&s, 100_000, 9).unwrap(), simulate_pow(&s, 100_000, 9).unwrap());
        assert_ne!(simulate_pow(&s, 100_000, 9).unwrap(), simulate_pow(&s, 100_000, 10).unwrap());
    }

    #[test]
    fn accounting() {
        let r = simulate_pow(&scenario(30.0), 123_450, 1).unwrap();
        assert_eq!(r.occupancy_total(), 123_450);
        assert_eq!(r.state_occupancy[BROADCAST_STATE], r.blocks() as u64);
        assert_eq!(r.wins_per_account[NETWORK_MINER], r.blocks() as u64);
        assert!(r.block_intervals.iter().sum::<u64>() <= 123_450);
    }

    #[test]
    fn half_probability_gives_two_tick_mean() {
        let r = simulate_pow(&scenario(2.0), 40_000, 3).unwrap();
        assert!(r.blocks() >= 10_000);
        let mean = r.mean_interval(0).unwrap();
        assert!((mean - 2.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(simulate_pow(&scenario(600.0), 5_999, 1).is_err());
        assert!(simulate_pow(&scenario(0.5), 100, 1).is_err());
        let mut s = scenario(10.0);
        s.tick_seconds = 3;
        assert!(simulate_pow(&s, 1_000, 1).is_err());
        s.tick_seconds = 0;
        assert!(simulate_pow(&s, 1_000, 1).is_err());
    }
}
