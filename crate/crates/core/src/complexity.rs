//! Statistical complexity of finite-state machines.
//!
//! The complexity of a machine is the Shannon entropy (in bits) of its
//! stationary state occupancy. The interesting regime for block production
//! is a two-state machine whose rare state has probability around `1e-22`,
//! where `1 - p` rounds to exactly `1.0` in `f64`. Every entry point here
//! therefore keeps the small probability as the primary quantity and
//! evaluates the `(1 - p) log2 (1 - p)` term from `p` alone.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on the occupancy sum before a machine is rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Below this probability the one-minus term is evaluated by series.
pub const SMALL_P_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("probability {0} is outside [0, 1]")]
    Domain(f64),
    #[error("argument {0} is outside the domain [0, 1) of log(1 - x)")]
    LogDomain(f64),
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
}

/// Statistical complexity in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexityValue(f64);

impl ComplexityValue {
    pub const ZERO: ComplexityValue = ComplexityValue(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ComplexityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2e} bits", self.0)
    }
}

fn check_probability(p: f64) -> Result<(), ComplexityError> {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(ComplexityError::Domain(p));
    }
    Ok(())
}

/// `ln(1 - x)` by the rational approximation `-x (6 - x) / (6 - 4x)`.
///
/// Returned verbatim; the relative error grows like `x^3 / 36`, so this is
/// only a good logarithm for small `x`.
pub fn pade_log1m(x: f64) -> Result<f64, ComplexityError> {
    if x.is_nan() || !(0.0..1.0).contains(&x) {
        return Err(ComplexityError::LogDomain(x));
    }
    Ok(-x * (6.0 - x) / (6.0 - 4.0 * x))
}

/// `-(1 - p) log2(1 - p)`, accurate to a few ulps for every `p` in `[0, 1]`.
///
/// For `p < 1e-3` the product is rearranged into the series
/// `p - sum_{k>=2} p^k / (k (k - 1))`, which never forms `1 - p`.
pub fn stable_one_minus_term(p: f64) -> Result<f64, ComplexityError> {
    check_probability(p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    let nats = if p < SMALL_P_THRESHOLD {
        let mut sum = p;
        let mut power = p;
        for k in 2..40u32 {
            power *= p;
            let term = power / f64::from(k * (k - 1));
            sum -= term;
            if term < sum * 1e-18 {
                break;
            }
        }
        sum
    } else {
        -(1.0 - p) * (-p).ln_1p()
    };
    Ok(nats / LN_2)
}

/// `-p log2 p` with `0 log 0 = 0`.
fn p_log_p_term(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Entropy in bits of a two-state machine whose second state has probability `p`.
pub fn binary_shannon_entropy(p: f64) -> Result<ComplexityValue, ComplexityError> {
    check_probability(p)?;
    // 1 - p is exact for p >= 0.5, so fold onto the accurate half.
    let small = if p > 0.5 { 1.0 - p } else { p };
    let bits = stable_one_minus_term(small)? + p_log_p_term(small);
    Ok(ComplexityValue(bits.max(0.0)))
}

/// A finite set of labelled states with a stationary occupancy distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonMachine {
    states: Vec<String>,
    occupancy: Vec<f64>,
}

impl EpsilonMachine {
    /// Builds a machine, renormalizing occupancy that is off by rounding noise.
    pub fn new(states: Vec<String>, occupancy: Vec<f64>) -> Result<Self, ComplexityError> {
        if states.is_empty() {
            return Err(ComplexityError::InvalidMachine("no states".into()));
        }
        if states.len() != occupancy.len() {
            return Err(ComplexityError::InvalidMachine(format!(
                "{} states but {} occupancy entries",
                states.len(),
                occupancy.len()
            )));
        }
        if let Some(bad) = occupancy.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(ComplexityError::InvalidMachine(format!(
                "occupancy {bad} is not a non-negative number"
            )));
        }
        let total: f64 = occupancy.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(ComplexityError::InvalidMachine(format!(
                "occupancy sums to {total}"
            )));
        }
        let occupancy = if total == 1.0 {
            occupancy
        } else {
            occupancy.into_iter().map(|p| p / total).collect()
        };
        Ok(Self { states, occupancy })
    }

    /// Two-state machine with occupancy `(1 - p, p)`.
    ///
    /// The first entry is stored rounded, but complexity is computed from `p`.
    pub fn two_state(
        common: impl Into<String>,
        rare: impl Into<String>,
        p: f64,
    ) -> Result<Self, ComplexityError> {
        check_probability(p)?;
        Ok(Self {
            states: vec![common.into(), rare.into()],
            occupancy: vec![1.0 - p, p],
        })
    }

    /// Normalizes raw per-state counts (e.g. seconds spent in each state).
    pub fn from_counts(states: Vec<String>, counts: &[u64]) -> Result<Self, ComplexityError> {
        if states.len() != counts.len() {
            return Err(ComplexityError::InvalidMachine(
                "state and count lengths differ".into(),
            ));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(ComplexityError::InvalidMachine("all counts are zero".into()));
        }
        let occupancy = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(states, occupancy)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn occupancy(&self) -> &[f64] {
        &self.occupancy
    }

    pub fn probability_of(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.occupancy[i])
    }
}

/// Shannon entropy of the machine's state occupancy, in bits.
///
/// The dominant state's term is taken from the summed mass of all other
/// states, so near-deterministic machines keep their tiny complexity.
pub fn statistical_complexity(machine: &EpsilonMachine) -> Result<ComplexityValue, ComplexityError> {
    let occ = &machine.occupancy;
    match occ.len() {
        1 => Ok(ComplexityValue::ZERO),
        2 => binary_shannon_entropy(occ[0].min(occ[1])),
        _ => {
            let (dominant, _) = occ
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |best, (i, &p)| if p > best.1 { (i, p) } else { best });
            let rest: f64 = occ
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != dominant)
                .map(|(_, &p)| p)
                .sum();
            let mut bits = stable_one_minus_term(rest.min(1.0))?;
            for (i, &p) in occ.iter().enumerate() {
                if i != dominant {
                    bits += p_log_p_term(p);
                }
            }
            let max = (occ.len() as f64).log2();
            Ok(ComplexityValue(bits.clamp(0.0, max)))
        }
    }
}
