use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::record::{t_step_big, t_step_u64};
use crate::error::{Error, Result};

pub const MAX_SIEVE_K: u32 = 40;

fn pow3(a: u32) -> u128 {
    3u128.pow(a)
}

/// `3^a < 2^j`, exact for `j <= 80`.
#[inline]
fn coefficient_below_one(a: u32, j: u32) -> bool {
    pow3(a) < 1u128 << j
}

/// Exact `F(j)` for `j = 1..=k`: the fraction of residues mod `2^j` whose parity
/// word has `3^a < 2^i` at some prefix `i <= j`.
pub fn stopping_densities(k: u32) -> Result<Vec<BigRational>> {
    if k == 0 || k > MAX_SIEVE_K {
        return Err(Error::usage(format!("density depth must be in 1..={MAX_SIEVE_K}, got {k}")));
    }
    // alive[a]: words of the current length with `a` ones that have not stopped.
    let mut alive = vec![1u64];
    let mut stopped = 0u64;
    let mut out = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let mut next = vec![0u64; alive.len() + 1];
        for (a, &c) in alive.iter().enumerate() {
            next[a] += c;
            next[a + 1] += c;
        }
        stopped *= 2;
        for (a, c) in next.iter_mut().enumerate() {
            if *c > 0 && coefficient_below_one(a as u32, j) {
                stopped += *c;
                *c = 0;
            }
        }
        alive = next;
        out.push(BigRational::new(BigInt::from(stopped), BigInt::from(1u64) << j));
    }
    Ok(out)
}

pub fn stopping_density(k: u32) -> Result<BigRational> {
    Ok(stopping_densities(k)?.pop().expect("k >= 1"))
}

/// Residues mod `2^k` whose parity word keeps `3^a >= 2^i` for all `i <= k`, and the
/// least `n0` such that every `n >= n0` in an eliminated class drops below itself
/// within `k` steps.
#[derive(Debug, Clone)]
pub struct Sieve {
    pub k: u32,
    pub survivors: Vec<u64>,
    pub threshold: u64,
}

impl Sieve {
    pub fn build(k: u32) -> Result<Sieve> {
        if k == 0 || k > 32 {
            return Err(Error::usage(format!("explicit sieve depth must be in 1..=32, got {k}")));
        }
        let mut survivors = Vec::new();
        let mut threshold = 1u64;
        // (residue r, depth j, ones a, T^j(r))
        let mut stack: Vec<(u64, u32, u32, u128)> = vec![(0, 0, 0, 0)];
        while let Some((r, j, a, y)) = stack.pop() {
            if j == k {
                survivors.push(r);
                continue;
            }
            for e in 0..2u64 {
                let c = r + (e << j);
                let tj = y + e as u128 * pow3(a);
                let odd = (tj & 1) as u32;
                let next = if odd == 1 { tj + (tj >> 1) + 1 } else { tj >> 1 };
                let (j2, a2) = (j + 1, a + odd);
                if coefficient_below_one(a2, j2) {
                    // T^{j2}(n) = (3^a2 n + beta) / 2^j2 for n = c (mod 2^j2)
                    let beta = (next << j2) - pow3(a2) * c as u128;
                    let gap = (1u128 << j2) - pow3(a2);
                    threshold = threshold.max((beta / gap + 1) as u64);
                } else {
                    stack.push((c, j2, a2, next));
                }
            }
        }
        survivors.sort_unstable();
        Ok(Sieve {
            k,
            survivors,
            threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerifyMode {
    Naive,
    Sieve { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivorStat {
    pub k: u32,
    /// Survivors mod `2^k`.
    pub survivors: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    #[serde(rename = "max_n")]
    pub n_max: u64,
    pub mode: VerifyMode,
    pub verified: bool,
    /// Starting values actually iterated.
    pub iterated: u64,
    /// Largest stopping time seen among iterated values, with its smallest witness.
    pub max_stopping_time: u64,
    pub max_stopping_witness: u64,
    pub survivor_fractions: Vec<SurvivorStat>,
}

/// Stopping time of `n >= 2` (steps until below `n`), or `None` at the step limit.
pub fn stopping_time(n: u64, step_limit: u64) -> Option<u64> {
    let mut x = n;
    let mut k = 0;
    while x >= n {
        if k == step_limit {
            return None;
        }
        match t_step_u64(x) {
            Some(y) => x = y,
            None => return stopping_time_big(n, x, k, step_limit),
        }
        k += 1;
    }
    Some(k)
}

fn stopping_time_big(n: u64, x: u64, mut k: u64, step_limit: u64) -> Option<u64> {
    let n = BigUint::from(n);
    let mut x = BigUint::from(x);
    while x >= n {
        if k == step_limit {
            return None;
        }
        t_step_big(&mut x);
        k += 1;
    }
    Some(k)
}

#[derive(Default, Clone, Copy)]
struct Acc {
    iterated: u64,
    max_sigma: u64,
    witness: u64,
}

impl Acc {
    fn see(&mut self, n: u64, s: u64) {
        self.iterated += 1;
        if s > self.max_sigma || (s == self.max_sigma && n < self.witness) {
            self.max_sigma = s;
            self.witness = n;
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        self.iterated += o.iterated;
        if o.max_sigma > self.max_sigma || (o.max_sigma == self.max_sigma && o.witness < self.witness) {
            self.max_sigma = o.max_sigma;
            self.witness = o.witness;
        }
        self
    }
}

fn check(n: u64, step_limit: u64, acc: &mut Acc) -> Result<()> {
    match stopping_time(n, step_limit) {
        Some(s) => {
            acc.see(n, s);
            Ok(())
        }
        None => Err(Error::falsified(
            "every n drops below itself within the step limit",
            n.to_string(),
        )),
    }
}

fn sweep_direct(lo: u64, hi: u64, step_limit: u64) -> Result<Acc> {
    const CHUNK: u64 = 1 << 16;
    if lo > hi {
        return Ok(Acc::default());
    }
    let chunks: Vec<(u64, u64)> = (lo..=hi)
        .step_by(CHUNK as usize)
        .map(|a| (a, (a + CHUNK - 1).min(hi)))
        .collect();
    chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = Acc::default();
            for n in a..=b {
                check(n, step_limit, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Acc>>>()
        .map(|v| v.into_iter().fold(Acc::default(), Acc::merge))
}

/// Confirms that every `2 <= n <= n_max` drops below itself, which by induction
/// means every such `n` reaches 1.
pub fn verify_range(n_max: u64, mode: VerifyMode, step_limit: u64) -> Result<VerificationReport> {
    if n_max < 2 {
        return Err(Error::usage("verification needs N >= 2"));
    }
    let (acc, fractions) = match mode {
        VerifyMode::Naive => (sweep_direct(2, n_max, step_limit)?, Vec::new()),
        VerifyMode::Sieve { k } => {
            let dens = stopping_densities(k)?;
            let fractions = dens
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let j = i as u32 + 1;
                    let total = 1u64 << j;
                    let stopped = (f * BigRational::from_integer(BigInt::from(total))).to_integer();
                    let survivors = total - u64::try_from(stopped).expect("count fits");
                    SurvivorStat {
                        k: j,
                        survivors,
                        fraction: survivors as f64 / total as f64,
                    }
                })
                .collect();
            // Enumerating residues beyond the range gains nothing.
            let kk = k.min(63 - n_max.leading_zeros()).clamp(1, 32);
            let sieve = Sieve::build(kk)?;
            let modulus = 1u64 << kk;
            let direct_hi = sieve.threshold.max(modulus).min(n_max + 1) - 1;
            let mut acc = sweep_direct(2, direct_hi, step_limit)?;
            let first_block = (direct_hi + 1) / modulus;
            let last_block = n_max / modulus;
            let blocks: Vec<u64> = (first_block..=last_block).collect();
            let survivors = &sieve.survivors;
            let rest = blocks
                .par_chunks(64)
                .map(|bs| {
                    let mut acc = Acc::default();
                    for &b in bs {
                        for &r in survivors {
                            let n = b * modulus + r;
                            if n > direct_hi && n <= n_max {
                                check(n, step_limit, &mut acc)?;
                            }
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<Acc>>>()?;
            for a in rest {
                acc = acc.merge(a);
            }
            (acc, fractions)
        }
    };
    Ok(VerificationReport {
        n_max,
        mode,
        verified: true,
        iterated: acc.iterated,
        max_stopping_time: acc.max_sigma,
        max_stopping_witness: acc.witness,
        survivor_fractions: fractions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigmath::rat;

    #[test]
    fn small_densities() {
        let d = stopping_densities(3).unwrap();
        assert_eq!(d[0], rat(1, 2));
        assert_eq!(d[1], rat(3, 4));
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
        assert!(stopping_density(0).is_err());
        assert!(stopping_density(41).is_err());
    }

    #[test]
    fn sieve_mod_4() {
        let s = Sieve::build(2).unwrap();
        assert_eq!(s.survivors, vec![3]);
        let r = verify_range(100, VerifyMode::Sieve { k: 2 }, 1000).unwrap();
        assert_eq!(r.survivor_fractions[1].fraction, 0.25);
    }

    #[test]
    fn survivors_match_density() {
        for k in 1..=14 {
            let s = Sieve::build(k).unwrap();
            let f = stopping_density(k).unwrap();
            let expected = (BigRational::from_integer(1.into()) - f) * BigRational::from_integer((1u64 << k).into());
            assert_eq!(BigRational::from_integer(s.survivors.len().into()), expected, "k={k}");
        }
    }

    #[test]
    fn naive_and_sieve_agree() {
        let a = verify_range(20_000, VerifyMode::Naive, 10_000).unwrap();
        for k in [4, 8, 16] {
            let b = verify_range(20_000, VerifyMode::Sieve { k }, 10_000).unwrap();
            assert!(b.verified);
            assert_eq!(a.max_stopping_time, b.max_stopping_time);
            assert_eq!(a.max_stopping_witness, b.max_stopping_witness);
        }
    }
}
