//! TOML scenario files for the simulators.
//!
//! ```toml
//! seed = 7
//! duration = 1_000_000
//!
//! [nxt]
//! constants = { gamma = 0.64 }
//! accounts = [
//!     { label = "alice", stake = 3_000_000 },
//!     { label = "bob", deposits = [{ amount = 5_000, height = 0 }] },
//! ]
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::coinage::{AgeAccrual, WalletOutput, SECONDS_PER_DAY};
use crate::nxt::{derive_public_key, Deposit, ForgingAccount, RetargetConstants};
use crate::pow::{CurrencyParams, Protocol};
use crate::sim::{CoinageScenario, KernelRetarget, NxtScenario, PowScenario};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario has no [{0}] section")]
    Missing(&'static str),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub duration: Option<u64>,
    pub pow: Option<PowSection>,
    pub nxt: Option<NxtSection>,
    pub coinage: Option<CoinageSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowSection {
    #[serde(default = "default_pow_name")]
    pub name: String,
    pub block_time: f64,
    pub hashrate: f64,
    #[serde(default = "default_tick")]
    pub tick_seconds: u64,
}

fn default_pow_name() -> String {
    "pow".into()
}

fn default_tick() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NxtSection {
    #[serde(default)]
    pub constants: RetargetConstants,
    pub initial_base_target: Option<f64>,
    pub accounts: Vec<AccountEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountEntry {
    pub label: String,
    /// Whole NXT deposited at genesis.
    pub stake: Option<u64>,
    /// Hex-encoded 32-byte key; derived from the label when absent.
    pub public_key: Option<String>,
    #[serde(default)]
    pub deposits: Vec<Deposit>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinageSection {
    pub target_per_coinday: f64,
    #[serde(default)]
    pub accrual: AgeAccrual,
    pub retarget: Option<KernelRetarget>,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputEntry {
    pub owner: String,
    pub amount: f64,
    /// Days already held when the run starts.
    #[serde(default)]
    pub held_days: f64,
    #[serde(default = "default_count")]
    pub count: u32,
}

fn default_count() -> u32 {
    1
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn pow_scenario(&self) -> Result<PowScenario, ScenarioError> {
        let section = self.pow.as_ref().ok_or(ScenarioError::Missing("pow"))?;
        let params = CurrencyParams::new(
            section.name.clone(),
            Protocol::PoW,
            section.block_time,
            section.hashrate,
        )
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(PowScenario {
            params,
            tick_seconds: section.tick_seconds,
        })
    }

    pub fn nxt_scenario(&self) -> Result<NxtScenario, ScenarioError> {
        let section = self.nxt.as_ref().ok_or(ScenarioError::Missing("nxt"))?;
        let accounts = section
            .accounts
            .iter()
            .map(AccountEntry::to_account)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NxtScenario {
            accounts,
            constants: section.constants,
            initial_base_target: section.initial_base_target,
        })
    }

    pub fn coinage_scenario(&self) -> Result<CoinageScenario, ScenarioError> {
        let section = self.coinage.as_ref().ok_or(ScenarioError::Missing("coinage"))?;
        let mut outputs = Vec::new();
        for entry in &section.outputs {
            if !(entry.held_days.is_finite() && entry.held_days >= 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "held_days {} for {}",
                    entry.held_days, entry.owner
                )));
            }
            let received_at = -(entry.held_days * SECONDS_PER_DAY).round() as i64;
            for _ in 0..entry.count {
                let id = outputs.len() as u64;
                let output = WalletOutput::new(id, entry.owner.clone(), entry.amount, received_at)
                    .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
                outputs.push(output);
            }
        }
        Ok(CoinageScenario {
            outputs,
            target_per_coinday: section.target_per_coinday,
            accrual: section.accrual,
            retarget: section.retarget,
        })
    }
}

impl AccountEntry {
    fn to_account(&self) -> Result<ForgingAccount, ScenarioError> {
        let public_key = match &self.public_key {
            Some(text) => hex::decode(text)
                .ok()
                .and_then(|b| <[u8; 32]>::try_from(b).ok())
                .ok_or_else(|| {
                    ScenarioError::Invalid(format!("public key of {} is not 32 hex bytes", self.label))
                })?,
            None => derive_public_key(&self.label),
        };
        let mut deposits = self.deposits.clone();
        if let Some(stake) = self.stake {
            deposits.insert(0, Deposit { amount: stake, height: 0 });
        }
        if deposits.is_empty() {
            return Err(ScenarioError::Invalid(format!(
                "account {} needs a stake or deposits",
                self.label
            )));
        }
        Ok(ForgingAccount::new(self.label.clone(), public_key, deposits))
    }
}
