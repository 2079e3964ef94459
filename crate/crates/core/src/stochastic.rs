//! Random-walk and branching-process models of `T`, and the large-deviation constant `c0`.
//!
//! Randomness comes from `ChaCha8Rng`: trials are split into blocks of [`BLOCK`], and block
//! `b` uses the generator seeded by `seed_from_u64(seed)` on stream `b`. Results therefore do
//! not depend on the thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const BLOCK: u64 = 4096;

/// Mean log step `(1/2) ln(3/4)`.
pub fn drift() -> f64 {
    0.5 * (0.75f64).ln()
}

/// `1/|drift| = 2/ln(4/3)`.
pub fn alpha0() -> f64 {
    1.0 / drift().abs()
}

const UP: f64 = 0.405_465_108_108_164_4; // ln(3/2)
const DOWN: f64 = -std::f64::consts::LN_2;

/// Cumulant generating function `ln(((3/2)^t + (1/2)^t)/2)` of one log step.
pub fn lambda(t: f64) -> f64 {
    // factor out the larger term to keep exp in range
    let (a, b) = (t * UP, t * DOWN);
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln() - std::f64::consts::LN_2
}

pub fn lambda_prime(t: f64) -> f64 {
    let (a, b) = (t * UP, t * DOWN);
    let hi = a.max(b);
    let (ea, eb) = ((a - hi).exp(), (b - hi).exp());
    (ea * UP + eb * DOWN) / (ea + eb)
}

/// Rate function `I(x) = sup_t (t x - lambda(t))`; infinite outside `[ln(1/2), ln(3/2)]`.
pub fn rate(x: f64) -> f64 {
    if !(DOWN..=UP).contains(&x) {
        return f64::INFINITY;
    }
    if x == DOWN || x == UP {
        return std::f64::consts::LN_2;
    }
    // lambda' is increasing from ln(1/2) to ln(3/2)
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while lambda_prime(lo) > x {
        lo *= 2.0;
    }
    while lambda_prime(hi) < x {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lambda_prime(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    t * x - lambda(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Report {
    pub c0: f64,
    /// The mean log step `-1/c0` of the extremal walks.
    pub x_star: f64,
    pub rate_at_x_star: f64,
}

/// The root `c > 1/|drift|` of `c I(-1/c) = 1`: the largest `c` for which some `n <= N`
/// is still expected to need `c ln N` steps.
pub fn compute_c0() -> C0Report {
    let f = |c: f64| c * rate(-1.0 / c) - 1.0;
    let (mut lo, mut hi) = (alpha0() * (1.0 + 1e-9), 1e4);
    assert!(f(lo) < 0.0 && f(hi) > 0.0, "c0 bracket");
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c0 = 0.5 * (lo + hi);
    C0Report {
        c0,
        x_star: -1.0 / c0,
        rate_at_x_star: rate(-1.0 / c0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RwReport {
    pub log_n: f64,
    pub trials: u64,
    pub seed: u64,
    /// Mean of `(tau - u/|drift|)/log_n`, where `u` is the overshoot below 0.
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Mean of the plain ratio `tau/log_n`.
    pub raw_mean: f64,
    pub raw_max: f64,
    pub mean_overshoot: f64,
    pub alpha0: f64,
    /// Mean log step of each block; all negative.
    pub block_mean_steps: Vec<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(values: &[f64], bins: usize) -> Histogram {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Histogram { lo, width, counts }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let a = self.lo + i as f64 * self.width;
            s.push_str(&format!("{a},{},{c}\n", a + self.width));
        }
        s
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn blocks(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(BLOCK))
        .map(|b| (b, BLOCK.min(trials - b * BLOCK)))
        .collect()
}

/// Hitting times of 0 for the walk started at `log_n` with steps `ln(3/2)`, `ln(1/2)`.
pub fn rw_sample(log_n: f64, trials: u64, seed: u64) -> Result<RwReport> {
    if !(log_n >= 10.0 && log_n <= 1e6) {
        return Err(Error::usage("log_n must be in [10, 1e6]"));
    }
    if trials < 1000 {
        return Err(Error::usage("need at least 1000 trials"));
    }
    let per: Vec<(Vec<(u64, f64)>, f64)> = blocks(trials)
        .par_iter()
        .map(|&(b, count)| {
            let mut rng = block_rng(seed, b);
            let mut out = Vec::with_capacity(count as usize);
            let (mut steps, mut sum) = (0u64, 0.0f64);
            for _ in 0..count {
                let mut s = log_n;
                let mut tau = 0u64;
                let mut bits = 0u64;
                let mut left = 0;
                while s > 0.0 {
                    if left == 0 {
                        bits = rng.next_u64();
                        left = 64;
                    }
                    let step = if bits & 1 == 1 { UP } else { DOWN };
                    bits >>= 1;
                    left -= 1;
                    s += step;
                    sum += step;
                    tau += 1;
                }
                steps += tau;
                out.push((tau, -s));
            }
            (out, sum / steps as f64)
        })
        .collect();
    let a0 = alpha0();
    let mut corrected = Vec::with_capacity(trials as usize);
    let mut raw = Vec::with_capacity(trials as usize);
    let mut over = 0.0;
    let mut block_mean_steps = Vec::new();
    for (v, m) in per {
        block_mean_steps.push(m);
        for (tau, u) in v {
            corrected.push((tau as f64 - u * a0) / log_n);
            raw.push(tau as f64 / log_n);
            over += u;
        }
    }
    let n = trials as f64;
    let mean = corrected.iter().sum::<f64>() / n;
    let variance = corrected.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RwReport {
        log_n,
        trials,
        seed,
        mean,
        variance,
        std_error: (variance / n).sqrt(),
        raw_mean: raw.iter().sum::<f64>() / n,
        raw_max: raw.iter().copied().fold(0.0, f64::max),
        mean_overshoot: over / n,
        alpha0: a0,
        block_mean_steps,
        histogram: Histogram::build(&raw, 40),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpReport {
    pub k: u32,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Standard deviation over mean.
    pub cv: f64,
    pub min: u64,
    pub max: u64,
    /// `(4/3)^k`.
    pub expected: f64,
}

/// Leaves at depth `k` of the tree where every node has one child plus a second
/// with probability 1/3.
pub fn bp_leafcounts(k: u32, trials: u64, seed: u64) -> Result<BpReport> {
    if k > 40 {
        return Err(Error::usage("branching depth must be at most 40"));
    }
    if trials < 2 {
        return Err(Error::usage("need at least 2 trials"));
    }
    let counts: Vec<u64> = blocks(trials)
        .par_iter()
        .flat_map_iter(|&(b, count)| {
            let mut rng = block_rng(seed, b);
            (0..count)
                .map(|_| {
                    let mut leaves = 1u64;
                    for _ in 0..k {
                        let extra = Binomial::new(leaves, 1.0 / 3.0).expect("valid binomial").sample(&mut rng);
                        leaves += extra;
                    }
                    leaves
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let n = trials as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let variance = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BpReport {
        k,
        trials,
        seed,
        mean,
        variance,
        std_error: (variance / n).sqrt(),
        cv: variance.sqrt() / mean,
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        expected: (4.0f64 / 3.0).powi(k as i32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulant_basics() {
        assert!(lambda(0.0).abs() < 1e-15);
        let h = 1e-6;
        let d = (lambda(h) - lambda(-h)) / (2.0 * h);
        assert!((d - drift()).abs() < 1e-4);
        assert!((lambda_prime(0.0) - drift()).abs() < 1e-12);
        assert!(rate(drift()).abs() < 1e-12);
    }

    #[test]
    fn rate_is_convex_and_nonnegative() {
        let n = 1000;
        let xs: Vec<f64> = (1..n).map(|i| DOWN + (UP - DOWN) * i as f64 / n as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| rate(x)).collect();
        for w in ys.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] > -1e-9);
        }
        assert!(ys.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn c0_value() {
        let r = compute_c0();
        assert!((r.c0 - 41.677).abs() < 0.01, "{}", r.c0);
        assert!((r.c0 * r.rate_at_x_star - 1.0).abs() < 1e-8);
    }

    #[test]
    fn random_walk() {
        let r = rw_sample(50.0, 20_000, 1).unwrap();
        assert!((r.mean - alpha0()).abs() < 4.0 * r.std_error, "{} vs {}", r.mean, alpha0());
        assert!(r.block_mean_steps.iter().all(|&m| m < 0.0));
        let again = rw_sample(50.0, 20_000, 1).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
        assert!(rw_sample(5.0, 20_000, 1).is_err());
    }

    #[test]
    fn branching() {
        let r = bp_leafcounts(0, 10, 3).unwrap();
        assert_eq!((r.min, r.max), (1, 1));
        let r = bp_leafcounts(20, 10_000, 3).unwrap();
        assert!((r.mean / r.expected - 1.0).abs() < 0.1, "{r:?}");
    }
}
