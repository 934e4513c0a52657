//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits of the fixed-point oracle. Enough for inputs down to 1e-300.
const FRAC: u64 = 1600;

fn one() -> BigInt {
    BigInt::one() << FRAC
}

/// Exact fixed-point image of a finite, non-negative f64.
fn fixed(x: f64) -> BigInt {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, e) = if exp == 0 {
        (bits & ((1 << 52) - 1), -1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
    };
    let shift = e + FRAC as i64;
    assert!(shift >= 0, "input below oracle resolution");
    BigInt::from(mantissa) << shift as u64
}

fn to_f64(v: &BigInt) -> f64 {
    let sign = if v.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let mag = v.abs();
    let bits = mag.bits();
    if bits == 0 {
        return 0.0;
    }
    let shift = bits.saturating_sub(64);
    let top = (&mag >> shift).to_f64().unwrap();
    sign * scale2(top, shift as i64 - FRAC as i64)
}

fn scale2(mut v: f64, mut e: i64) -> f64 {
    while e > 0 {
        let step = e.min(1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        v /= 2f64.powi(step as i32);
        e += step;
    }
    v
}

/// Truncating fixed-point product; shifting a negative BigInt would floor.
fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    let p = a * b;
    let mag = p.abs() >> FRAC;
    if p.is_negative() {
        -mag
    } else {
        mag
    }
}

fn div(a: &BigInt, b: &BigInt) -> BigInt {
    (a << FRAC) / b
}

/// 2·atanh(z) = ln((1+z)/(1-z)), |z| ≤ 1/3.
fn two_atanh(z: &BigInt) -> BigInt {
    let z2 = mul(z, z);
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !term.is_zero() {
        sum += &term / BigInt::from(k);
        term = mul(&term, &z2);
        k += 2;
    }
    sum * 2
}

/// ln of a fixed-point value y in (0, 2].
fn ln_fixed(y: &BigInt) -> BigInt {
    let one = one();
    // halve/double into [1/2, 1] and track powers of two
    let mut m = y.clone();
    let mut twos = 0i64;
    while m > one {
        m >>= 1;
        twos += 1;
    }
    while m < (&one >> 1) {
        m <<= 1;
        twos -= 1;
    }
    let z = div(&(&m - &one), &(&m + &one));
    two_atanh(&z) + ln2() * twos
}

fn ln2() -> BigInt {
    two_atanh(&div(&one(), &(BigInt::from(3) << FRAC)))
}

/// ln(1 − x) for x in [0, 1).
pub fn ln1m(x: f64) -> f64 {
    to_f64(&ln1m_fixed(x))
}

fn ln1m_fixed(x: f64) -> BigInt {
    let xf = fixed(x);
    let two = BigInt::from(2) << FRAC;
    // ln(1-x) = 2 atanh(-x / (2 - x)), accurate for tiny x
    two_atanh(&-div(&xf, &(two - &xf)))
}

/// −(1 − p)·log₂(1 − p).
pub fn one_minus_term(p: f64) -> f64 {
    let l = ln1m_fixed(p);
    let one_minus = one() - fixed(p);
    to_f64(&div(&-mul(&one_minus, &l), &ln2()))
}

/// Binary entropy in bits.
pub fn entropy(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    let pf = fixed(p);
    let a = -mul(&pf, &ln_fixed(&pf));
    let b = -mul(&(one() - &pf), &ln1m_fixed(p));
    to_f64(&div(&(a + b), &ln2()))
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

/// Exact `t > h` for a finite non-negative f64 and an integer.
pub fn real_exceeds(t: f64, h: u64) -> bool {
    assert!(t.is_finite() && t >= 0.0);
    let scaled = fixed(t);
    scaled > (BigInt::from(h) << FRAC)
}

/// Plain SHA-256 following the FIPS 180-4 description.
pub fn sha256(message: &[u8]) -> [u8; 32] {
    const K: [u32; 64] = [
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
        0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
        0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
        0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
    ];
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
    ];
    let mut data = message.to_vec();
    let bit_len = (message.len() as u64) * 8;
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&bit_len.to_be_bytes());

    for block in data.chunks(64) {
        let mut w = [0u32; 64];
        for i in 0..16 {
            w[i] = u32::from_be_bytes([block[4 * i], block[4 * i + 1], block[4 * i + 2], block[4 * i + 3]]);
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16].wrapping_add(s0).wrapping_add(w[i - 7]).wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let t1 = hh.wrapping_add(s1).wrapping_add(ch).wrapping_add(K[i]).wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let t2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(t1);
            d = c;
            c = b;
            b = a;
            a = t1.wrapping_add(t2);
        }
        for (slot, v) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *slot = slot.wrapping_add(v);
        }
    }
    let mut out = [0u8; 32];
    for (i, word) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&word.to_be_bytes());
    }
    out
}

/// Iterated-hash hit: eight SHA-256 passes, first 8 bytes little-endian.
pub fn reference_hit(public_key: &[u8; 32], signature: &[u8; 32]) -> u64 {
    let mut buf = public_key.to_vec();
    buf.extend_from_slice(signature);
    let mut digest = sha256(&buf);
    for _ in 1..8 {
        digest = sha256(&digest);
    }
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Largest gap between the empirical CDF of `samples` (in [0,1)) and uniform.
pub fn ks_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Kolmogorov critical value at the 1% level for large n.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Replays a forging run and recomputes, second by second, which accounts
/// have `base_target · s · balance > hit`. Returns the rounds checked.
pub fn brute_force_equivalence(
    accounts: &[consensus_complexity::nxt::ForgingAccount],
    duration: u64,
    seed: u64,
) -> Result<usize, String> {
    use consensus_complexity::sim::{NxtScenario, NxtSimulator};

    let scenario = NxtScenario::new(accounts.to_vec());
    let mut sim = NxtSimulator::new(&scenario, seed).map_err(|e| e.to_string())?;
    let mut rounds = 0;
    while let Some(round) = sim.step(duration).map_err(|e| e.to_string())? {
        rounds += 1;
        let bt = round.base_target;
        let hits: Vec<u64> = accounts
            .iter()
            .map(|a| reference_hit(&a.public_key, &round.generation_signature))
            .collect();
        for (i, a) in accounts.iter().enumerate() {
            if round.hits[i].0 != hits[i] {
                return Err(format!("height {}: hit of {} differs", round.height, a.label));
            }
        }
        let balances: Vec<u64> = accounts.iter().map(|a| a.stake_nxt()).collect();
        if round.effective_balances != balances {
            return Err(format!("height {}: balances differ", round.height));
        }
        let eligible = |s: u64| -> Vec<&str> {
            accounts
                .iter()
                .enumerate()
                .filter(|&(i, _)| real_exceeds(bt * s as f64 * balances[i] as f64, hits[i]))
                .map(|(_, a)| a.label.as_str())
                .collect()
        };
        for s in 1..round.second {
            let early = eligible(s);
            if !early.is_empty() {
                return Err(format!("height {}: {early:?} could forge at {s}s", round.height));
            }
        }
        let mut expected = eligible(round.second);
        let mut got: Vec<&str> = round.candidates.iter().map(|c| c.forger.as_str()).collect();
        expected.sort_unstable();
        got.sort_unstable();
        if expected != got {
            return Err(format!(
                "height {} at {}s: oracle {expected:?}, simulator {got:?}",
                round.height, round.second
            ));
        }
        if !got.contains(&round.winner.forger.as_str()) {
            return Err(format!("height {}: winner is not a candidate", round.height));
        }
    }
    Ok(rounds)
}
