use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::pow_i;
use crate::error::{Error, Result};
use crate::maps::{builtin, trajectory, CycleRecord, Num, Termination, TrajectoryOptions};
use crate::parity::ParityVector;

/// The rational fixed point of the affine composite along a parity word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleValue {
    /// Word length (steps of `T`).
    pub n: usize,
    /// Number of odd steps.
    pub m: usize,
    pub ones: Vec<usize>,
    #[serde(with = "crate::report::rational")]
    pub value: BigRational,
    pub integer: bool,
}

/// `x = sum_k 3^(m-k-1) 2^(v_k) / (2^n - 3^m)` for ones at `v_0 < .. < v_(m-1)`.
pub fn cycle_value(parity: &ParityVector) -> Result<CycleValue> {
    scaled_cycle_value(parity, 1)
}

/// Fixed point of the word under `x -> (3x + d)/2`, `x -> x/2`.
pub fn scaled_cycle_value(parity: &ParityVector, d: i64) -> Result<CycleValue> {
    if parity.is_empty() {
        return Err(Error::usage("cycle value of an empty parity word"));
    }
    let ones = parity.one_positions();
    let (n, m) = (parity.len(), ones.len());
    let mut num = BigInt::zero();
    for (k, &v) in ones.iter().enumerate() {
        num += pow_i(3, (m - k - 1) as u64) << v;
    }
    let den = (BigInt::one() << n) - pow_i(3, m as u64);
    let value = BigRational::new(num * d, den);
    Ok(CycleValue {
        n,
        m,
        ones,
        integer: value.denom().is_one(),
        value,
    })
}

/// Applies the word to `x` with `T`-steps, checking the parities along the way.
pub fn replay(parity: &ParityVector, x: &BigRational, d: i64) -> Option<BigRational> {
    let two = BigInt::from(2);
    let mut y = x.clone();
    for bit in parity.iter() {
        if y.denom().is_one() {
            let odd = y.numer().is_odd();
            if odd != bit {
                return None;
            }
        }
        y = if bit { (y * BigInt::from(3) + BigInt::from(d)) / &two } else { y / &two };
    }
    Some(y)
}

/// Lyndon words (aperiodic necklaces) of length `n` over {0, 1}, as bit masks
/// with bit `i` = letter `i`.
pub fn lyndon_words(n: usize) -> Vec<u64> {
    assert!((1..=63).contains(&n));
    let mut out = Vec::new();
    let mut a = vec![0u8; n + 1];
    // Fredricksen-Kessler-Maiorana, 1-indexed
    fn gen(t: usize, p: usize, n: usize, a: &mut Vec<u8>, out: &mut Vec<u64>) {
        if t > n {
            if p == n {
                let mut w = 0u64;
                for i in 0..n {
                    w |= (a[i + 1] as u64) << i;
                }
                out.push(w);
            }
            return;
        }
        a[t] = a[t - p];
        gen(t + 1, p, n, a, out);
        for j in (a[t - p] + 1)..2 {
            a[t] = j;
            gen(t + 1, t, n, a, out);
        }
    }
    gen(1, 1, n, &mut a, &mut out);
    out
}

/// Integer cycles of `(3x + d)/2`, `x/2` with period at most `max_period` whose
/// elements are coprime to `d`.
pub fn rational_cycles_3xd(d: i64, max_period: usize) -> Result<Vec<CycleRecord>> {
    if d < 1 || d % 2 == 0 || d % 3 == 0 {
        return Err(Error::usage(format!("d must be a positive integer coprime to 6, got {d}")));
    }
    if max_period == 0 || max_period > 40 {
        return Err(Error::usage("max period must be in 1..=40"));
    }
    let map = builtin::three_x_plus(d)?;
    let found: Vec<i128> = (1..=max_period)
        .into_par_iter()
        .flat_map_iter(|n| {
            lyndon_words(n).into_iter().filter_map(move |w| word_value(w, n, d))
        })
        .collect();
    let mut cycles = BTreeMap::new();
    for x in found {
        if x.gcd(&(d as i128)) != 1 {
            continue;
        }
        let t = trajectory(
            &map,
            &Num::Small(x),
            &TrajectoryOptions {
                record_iterates: false,
                ..Default::default()
            },
        )?;
        if let Termination::EnteredCycle { cycle } = t.termination {
            cycles.insert(cycle.min.clone(), cycle);
        }
    }
    Ok(cycles.into_values().collect())
}

/// Integer fixed point of word `w` (length `n`) under the 3x+d map, if any.
fn word_value(w: u64, n: usize, d: i64) -> Option<i128> {
    let m = w.count_ones();
    let den = (1i128 << n) - 3i128.pow(m);
    let mut num = 0i128;
    let mut k = 0u32;
    for v in 0..n {
        if w >> v & 1 == 1 {
            num += 3i128.pow(m - k - 1) << v;
            k += 1;
        }
    }
    let num = num.checked_mul(d as i128)?;
    (num % den == 0).then(|| num / den)
}

/// Solutions `(k, l, h)` of `(2^(k+l) - 3^k) h = 2^l - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CircuitSolution {
    pub k: u32,
    pub l: u32,
    #[serde(with = "crate::report::decimal")]
    pub h: BigInt,
}

/// All solutions with `0 <= k <= k_max`, `0 <= l <= l_max`, `h` in `[h_lo, h_hi]`.
pub fn circuit_solutions(k_max: u32, l_max: u32, h_lo: &BigInt, h_hi: &BigInt) -> Result<Vec<CircuitSolution>> {
    if k_max > 200 || l_max > 200 {
        return Err(Error::usage("circuit bounds must be at most 200"));
    }
    if h_lo > h_hi {
        return Err(Error::usage("empty h range"));
    }
    let mut out = Vec::new();
    for k in 0..=k_max {
        for l in 0..=l_max {
            let a = (BigInt::one() << (k + l) as usize) - pow_i(3, k as u64);
            let b: BigInt = (BigInt::one() << l as usize) - 1;
            if a.is_zero() {
                // k = l = 0: every h solves 0 = 0
                if b.is_zero() && (h_hi - h_lo) <= BigInt::from(10_000) {
                    let mut h = h_lo.clone();
                    while h <= *h_hi {
                        out.push(CircuitSolution { k, l, h: h.clone() });
                        h += 1;
                    }
                }
                continue;
            }
            let (q, r) = b.div_rem(&a);
            if r.is_zero() && q >= *h_lo && q <= *h_hi {
                out.push(CircuitSolution { k, l, h: q });
            }
        }
    }
    Ok(out)
}

/// `(k, l)` when the cycle is one circuit: `k` odd steps followed by `l` even ones.
pub fn circuit_shape(cycle: &CycleRecord) -> Option<(usize, usize)> {
    let bits: Vec<bool> = cycle.elements.iter().map(|x| x.is_odd()).collect();
    let n = bits.len();
    let start = (0..n).find(|&i| bits[i] && !bits[(i + n - 1) % n])?;
    let k = (0..n).take_while(|&j| bits[(start + j) % n]).count();
    let l = n - k;
    let ok = (k..n).all(|j| !bits[(start + j) % n]);
    (ok && l > 0).then_some((k, l))
}

/// `|x| < 3^n` for an integer cycle value.
pub fn within_three_pow(v: &CycleValue) -> bool {
    !v.integer || v.value.numer().abs() < pow_i(3, v.n as u64)
}
