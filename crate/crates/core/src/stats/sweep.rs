use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::record::{orbit_u64, sigma_inf_height, t_step_big, t_step_u64};
use crate::error::{Error, Result};
use crate::maps::Limits;

const CHUNK: u64 = 1 << 14;

fn chunks(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    if lo > hi {
        return Vec::new();
    }
    (lo..=hi)
        .step_by(CHUNK as usize)
        .map(|a| (a, a.saturating_add(CHUNK - 1).min(hi)))
        .collect()
}

/// A maximal run of consecutive integers sharing height and total stopping time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeightRun {
    #[serde(with = "crate::report::decimal")]
    pub start: BigUint,
    pub length: u64,
    pub height: u64,
    pub sigma_inf: u64,
}

/// Runs of length at least `min_len` inside `[lo, lo + count)`. Runs touching the
/// ends are reported as far as the window sees them.
pub fn equal_height_tuples(lo: &BigUint, count: u64, min_len: u64, limits: &Limits) -> Result<Vec<HeightRun>> {
    if *lo < BigUint::one() {
        return Err(Error::usage("equal-height search starts at n >= 1"));
    }
    let keys: Vec<Option<(u64, u64)>> = chunks(0, count.saturating_sub(1))
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            (a..=b).map(|i| sigma_inf_height(&(lo + BigUint::from(i)), limits))
        })
        .collect();
    let mut runs = Vec::new();
    let mut i = 0usize;
    while i < keys.len() {
        let mut j = i + 1;
        while j < keys.len() && keys[j].is_some() && keys[j] == keys[i] {
            j += 1;
        }
        if let Some((s, h)) = keys[i] {
            let len = (j - i) as u64;
            if len >= min_len.max(1) {
                runs.push(HeightRun {
                    start: lo + BigUint::from(i as u64),
                    length: len,
                    height: h,
                    sigma_inf: s,
                });
            }
        }
        i = j;
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Champion {
    pub n: u64,
    #[serde(with = "crate::report::decimal")]
    pub excursion: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcursionReport {
    pub n_max: u64,
    /// `n` with `t(n) > t(m)` for all `m < n`.
    pub champions: Vec<Champion>,
    /// Values with `t(n) > 8 n^2`.
    pub violations: Vec<Champion>,
    /// Starting values whose orbit left 64 bits or hit the step limit.
    pub unresolved: Vec<u64>,
}

fn excursion(n: u64, step_limit: u64) -> Option<u128> {
    if let Some((_, _, t)) = orbit_u64(n, step_limit) {
        return Some(t as u128);
    }
    // u64 overflow: finish in big integers.
    let mut x = BigUint::from(n);
    let mut max = x.clone();
    let mut k = 0;
    while !x.is_one() {
        if k == step_limit {
            return None;
        }
        t_step_big(&mut x);
        k += 1;
        if x > max {
            max = x.clone();
        }
    }
    max.to_u128()
}

/// Champions of `t(n)` over `1 <= n <= n_max` and the check `t(n) <= 8 n^2`.
pub fn excursion_records(n_max: u64, step_limit: u64) -> Result<ExcursionReport> {
    if n_max < 2 {
        return Err(Error::usage("excursion sweep needs N >= 2"));
    }
    let parts: Vec<(Vec<Champion>, Vec<Champion>, Vec<u64>)> = chunks(1, n_max)
        .par_iter()
        .map(|&(a, b)| {
            let mut local = Vec::new();
            let mut bad = Vec::new();
            let mut unresolved = Vec::new();
            let mut best = 0u128;
            for n in a..=b {
                match excursion(n, step_limit) {
                    Some(t) => {
                        if t > best {
                            best = t;
                            local.push(Champion { n, excursion: t });
                        }
                        if t > 8 * (n as u128) * (n as u128) {
                            bad.push(Champion { n, excursion: t });
                        }
                    }
                    None => unresolved.push(n),
                }
            }
            (local, bad, unresolved)
        })
        .collect();
    let mut champions = Vec::new();
    let mut violations = Vec::new();
    let mut unresolved = Vec::new();
    let mut best = 0u128;
    for (local, bad, un) in parts {
        for c in local {
            if c.excursion > best {
                best = c.excursion;
                champions.push(c);
            }
        }
        violations.extend(bad);
        unresolved.extend(un);
    }
    Ok(ExcursionReport {
        n_max,
        champions,
        violations,
        unresolved,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BelowPowerReport {
    #[serde(with = "crate::report::rational")]
    pub beta: BigRational,
    pub n_max: u64,
    pub max_steps: u64,
    pub hits: u64,
    pub fraction: f64,
}

/// `x < n^(p/q)`, decided exactly near equality.
fn below_power(x: u64, n: u64, p: u64, q: u64) -> bool {
    let lhs = q as f64 * (x as f64).ln();
    let rhs = p as f64 * (n as f64).ln();
    if (lhs - rhs).abs() > 1e-9 * rhs.abs().max(1.0) {
        return lhs < rhs;
    }
    num_traits::pow(BigUint::from(x), q as usize) < num_traits::pow(BigUint::from(n), p as usize)
}

/// Fraction of `2 <= n <= n_max` with `T^k(n) < n^beta` for some `1 <= k <= max_steps`.
pub fn below_power_density(beta: &BigRational, n_max: u64, max_steps: u64) -> Result<BelowPowerReport> {
    let zero = BigRational::from_integer(0.into());
    if *beta <= zero || *beta >= BigRational::one() {
        return Err(Error::usage("beta must lie in (0, 1)"));
    }
    if n_max < 2 {
        return Err(Error::usage("density sweep needs N >= 2"));
    }
    let p = beta.numer().to_u64().ok_or_else(|| Error::usage("beta numerator too large"))?;
    let q = beta.denom().to_u64().ok_or_else(|| Error::usage("beta denominator too large"))?;
    if q > 10_000 {
        return Err(Error::usage("beta denominator too large"));
    }
    let hits: u64 = chunks(2, n_max)
        .par_iter()
        .map(|&(a, b)| {
            (a..=b)
                .filter(|&n| {
                    let mut x = n;
                    for _ in 0..max_steps {
                        match t_step_u64(x) {
                            Some(y) => x = y,
                            None => return false,
                        }
                        if below_power(x, n, p, q) {
                            return true;
                        }
                    }
                    false
                })
                .count() as u64
        })
        .sum();
    Ok(BelowPowerReport {
        beta: beta.clone(),
        n_max,
        max_steps,
        hits,
        fraction: hits as f64 / (n_max - 1) as f64,
    })
}
