use consensus_complexity::coinage::{AgeAccrual, WalletOutput, SECONDS_PER_DAY};
use consensus_complexity::nxt::{nxt_complexity, ForgingAccount};
use consensus_complexity::pow::{pow_complexity, CurrencyParams, Protocol};
use consensus_complexity::sim::{
    empirical_complexity, simulate_coinage_kernel, simulate_nxt_forging, simulate_pow,
    stake_share_estimate, CoinageScenario, NxtScenario, PowScenario, SimulationReport,
};

fn pow_scenario(block_time: f64, hashrate: f64) -> PowScenario {
    PowScenario {
        params: CurrencyParams::new("test", Protocol::PoW, block_time, hashrate).unwrap(),
        tick_seconds: 1,
    }
}

#[test]
fn pow_intervals_are_geometric() {
    // p = 1/600 per second; 10^5 blocks
    let r = simulate_pow(&pow_scenario(600.0, 1e12), 60_000_000, 17).unwrap();
    let n = r.blocks() as f64;
    assert!(n > 95_000.0);
    let p = 1.0 / 600.0;
    let mean = r.mean_interval(0).unwrap();
    let se = ((1.0 - p) / (p * p) / n).sqrt();
    assert!((mean - 600.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    // variance of a geometric interval is (1-p)/p^2
    let var = r.block_intervals.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((var / ((1.0 - p) / (p * p)) - 1.0).abs() < 0.03, "variance {var}");
}

#[test]
fn pow_empirical_complexity_tracks_tick_probability() {
    let scenario = pow_scenario(20.0, 1e6);
    let r = simulate_pow(&scenario, 2_000_000, 3).unwrap();
    let measured = empirical_complexity(&r).unwrap().bits();
    let per_tick = consensus_complexity::binary_shannon_entropy(1.0 / 20.0).unwrap().bits();
    assert!((measured - per_tick).abs() < 0.01, "{measured} vs {per_tick}");
    // the table value is per hash trial, far smaller
    assert!(pow_complexity(&scenario.params).unwrap().bits() < 1e-5);
}

#[test]
fn pow_rejects_bad_configs() {
    assert!(simulate_pow(&pow_scenario(600.0, 1.0), 100, 1).is_err());
    let mut s = pow_scenario(0.5, 4.0);
    assert!(simulate_pow(&s, 100, 1).is_err());
    s = pow_scenario(10.0, 1.0);
    s.tick_seconds = 0;
    assert!(simulate_pow(&s, 1000, 1).is_err());
}

fn accounts(stakes: &[u64]) -> Vec<ForgingAccount> {
    stakes
        .iter()
        .enumerate()
        .map(|(i, &s)| ForgingAccount::genesis(format!("acct{i}"), s))
        .collect()
}

#[test]
fn nxt_interval_and_complexity_near_one_minute() {
    let scenario = NxtScenario::new(accounts(&[1_000_000, 2_000_000, 3_000_000, 4_000_000]));
    let r = simulate_nxt_forging(&scenario, 300_000, 9).unwrap();
    let mean = r.mean_interval(100).unwrap();
    assert!((mean - 60.0).abs() < 6.0, "mean {mean}");
    let c = empirical_complexity(&r).unwrap().bits();
    let closed = nxt_complexity(60.0).unwrap().bits();
    assert!((c - closed).abs() < 0.02, "{c} vs {closed}");
    assert_eq!(r.occupancy_total(), 300_000);
}

#[test]
fn nxt_larger_stake_wins_more() {
    let scenario = NxtScenario::new(accounts(&[3_000_000, 1_000_000]));
    let r = simulate_nxt_forging(&scenario, 200_000, 12).unwrap();
    let shares = stake_share_estimate(&r, &scenario.accounts).unwrap();
    assert!(shares["acct0"] > shares["acct1"]);
    assert!((shares.values().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn stake_share_rejects_mismatched_accounts() {
    let scenario = NxtScenario::new(accounts(&[5_000]));
    let r = simulate_nxt_forging(&scenario, 5_000, 1).unwrap();
    assert!(stake_share_estimate(&r, &accounts(&[5_000, 6_000])).is_err());
}

#[test]
fn immature_accounts_never_forge() {
    let mut accts = accounts(&[50_000, 50_000]);
    accts[1].deposits[0].height = 100_000;
    let scenario = NxtScenario::new(accts);
    let r = simulate_nxt_forging(&scenario, 20_000, 2).unwrap();
    assert_eq!(r.wins_per_account["acct1"], 0);
    assert_eq!(r.wins_per_account["acct0"], r.blocks() as u64);
}

fn aged_outputs(owner: &str, n: u64, first_id: u64, days: f64) -> Vec<WalletOutput> {
    (0..n)
        .map(|i| WalletOutput::new(first_id + i, owner, 1.0, -(days * SECONDS_PER_DAY) as i64).unwrap())
        .collect()
}

#[test]
fn older_outputs_find_kernels_sooner() {
    let mut outputs = aged_outputs("old", 500, 0, 200.0);
    outputs.extend(aged_outputs("young", 500, 500, 100.0));
    let scenario = CoinageScenario {
        outputs,
        target_per_coinday: 1e-4,
        accrual: AgeAccrual::Continuous,
        retarget: None,
    };
    let r = simulate_coinage_kernel(&scenario, 3000, 4).unwrap();
    let mean = |owner: &str| {
        let times: Vec<f64> = r
            .kernels
            .iter()
            .filter(|k| k.owner == owner && k.output_id < 1000)
            .map(|k| k.search_seconds as f64)
            .collect();
        times.iter().sum::<f64>() / times.len() as f64
    };
    let ratio = mean("young") / mean("old");
    assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
}

fn all_reports(seed: u64) -> Vec<SimulationReport> {
    let coin = CoinageScenario {
        outputs: aged_outputs("a", 50, 0, 30.0),
        target_per_coinday: 1e-3,
        accrual: AgeAccrual::WholeDays,
        retarget: None,
    };
    vec![
        simulate_pow(&pow_scenario(60.0, 1e9), 100_000, seed).unwrap(),
        simulate_nxt_forging(&NxtScenario::new(accounts(&[10_000, 20_000, 30_000])), 50_000, seed).unwrap(),
        simulate_coinage_kernel(&coin, 5_000, seed).unwrap(),
    ]
}

#[test]
fn same_seed_same_report() {
    let a = all_reports(31);
    let b = all_reports(31);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
    }
    let c = all_reports(32);
    assert_ne!(a[0].block_intervals, c[0].block_intervals);
}

#[test]
fn report_json_round_trip() {
    for r in all_reports(8) {
        let text = serde_json::to_string(&r).unwrap();
        let back: SimulationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
