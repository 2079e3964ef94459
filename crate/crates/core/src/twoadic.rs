//! The 3x+1 map on `Z/2^n`: parity vectors `Q`, the conjugacy `Phi` and the
//! permutation it induces.
//!
//! `Phi(x) = -sum_j 2^(d_j) / 3^(j+1)` for `x = sum_j 2^(d_j)`, `d_0 < d_1 < ...`.
//! Bits `d_j >= n` only add multiples of `2^n`, so `Phi` is well defined on residues.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::parity::ParityVector;

pub const MAX_BITS: u32 = 32;
pub const MAX_PERM_BITS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TruncatedTwoAdic {
    pub value: u64,
    pub n: u32,
}

impl TruncatedTwoAdic {
    /// Reduce any integer mod `2^n`.
    pub fn new(x: i128, n: u32) -> Result<Self> {
        check_bits(n, MAX_BITS)?;
        Ok(TruncatedTwoAdic {
            value: (x.rem_euclid(1i128 << n)) as u64,
            n,
        })
    }

    /// The residue of `p/q` for odd `q`.
    pub fn from_ratio(p: i128, q: i128, n: u32) -> Result<Self> {
        if q % 2 == 0 {
            return Err(Error::usage("2-adic ratio needs an odd denominator"));
        }
        check_bits(n, MAX_BITS)?;
        let m = 1u64 << n;
        let inv = inverse_odd(q.rem_euclid(m as i128) as u64, n);
        let p = p.rem_euclid(m as i128) as u64;
        Ok(TruncatedTwoAdic {
            value: mul_mod(p, inv, n),
            n,
        })
    }
}

fn check_bits(n: u32, max: u32) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::usage(format!("bit count must be in 1..={max}, got {n}")));
    }
    Ok(())
}

#[inline]
fn mask(n: u32) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, n: u32) -> u64 {
    a.wrapping_mul(b) & mask(n)
}

/// Inverse of odd `a` mod `2^n` by Newton iteration.
fn inverse_odd(a: u64, n: u32) -> u64 {
    let mut x = a; // correct to 3 bits
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x & mask(n)
}

/// Parities of `T^i(x)` for `i < n`; they depend only on `x mod 2^n`.
pub fn parity_prefix(x: i128, n: u32) -> Result<ParityVector> {
    check_bits(n, MAX_BITS)?;
    let mut v = x;
    let mut out = ParityVector::new();
    for _ in 0..n {
        let odd = v & 1 == 1;
        out.push(odd);
        v = if odd { (3 * v + 1) >> 1 } else { v >> 1 };
    }
    Ok(out)
}

/// `Q_n(x) = sum_i a_i 2^i` over the first `n` parities.
pub fn q_mod(x: u64, n: u32) -> u64 {
    let mut v = x as u128;
    let mut out = 0u64;
    for i in 0..n {
        if v & 1 == 1 {
            out |= 1 << i;
            v = (3 * v + 1) >> 1;
        } else {
            v >>= 1;
        }
    }
    out
}

/// Inverses of `3^(j+1)` mod `2^n`, negated, for `j < n`.
fn neg_inv3_table(n: u32) -> Vec<u64> {
    let inv3 = inverse_odd(3, n);
    let mut out = Vec::with_capacity(n as usize);
    let mut p = inv3;
    for _ in 0..n {
        out.push(p.wrapping_neg() & mask(n));
        p = mul_mod(p, inv3, n);
    }
    out
}

fn phi_with(x: u64, n: u32, table: &[u64]) -> u64 {
    let mut acc = 0u64;
    let mut bits = x & mask(n);
    let mut j = 0;
    while bits != 0 {
        let d = bits.trailing_zeros();
        acc = acc.wrapping_add(table[j] << d);
        bits &= bits - 1;
        j += 1;
    }
    acc & mask(n)
}

/// `Phi(x) mod 2^n`.
pub fn phi_mod(x: u64, n: u32) -> Result<u64> {
    check_bits(n, MAX_BITS)?;
    Ok(phi_with(x, n, &neg_inv3_table(n)))
}

/// `T` on a residue mod `2^n`, defined mod `2^(n-1)`.
#[inline]
fn t_res(x: u64, n: u32) -> u64 {
    let v = x as u128;
    let y = if v & 1 == 1 { (3 * v + 1) >> 1 } else { v >> 1 };
    (y as u64) & mask(n - 1)
}

/// The shift: drop the lowest bit.
#[inline]
fn shift(x: u64) -> u64 {
    x >> 1
}

/// The table of `Phi` on all of `Z/2^n`.
pub fn phi_table(n: u32) -> Result<Vec<u32>> {
    check_bits(n, MAX_PERM_BITS)?;
    let table = neg_inv3_table(n);
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|x| phi_with(x, n, &table) as u32)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermAnalysis {
    pub n: u32,
    #[serde(with = "crate::report::decimal")]
    pub order: BigUint,
    pub cycle_count: u64,
    pub fixed_point_count: u64,
    pub fixed_points: Vec<u64>,
    /// `Q_n(Phi_n(x)) = x` for every residue.
    pub inverse_checked: bool,
    /// `Phi_n` maps odd residues onto odd residues.
    pub odd_restriction_permutes: bool,
}

/// Order, fixed points and bijectivity of `Phi_n`.
pub fn perm_analysis(n: u32) -> Result<PermAnalysis> {
    if !(4..=MAX_PERM_BITS).contains(&n) {
        return Err(Error::usage(format!("permutation analysis needs 4 <= n <= {MAX_PERM_BITS}")));
    }
    let phi = phi_table(n)?;
    let size = phi.len();
    let inverse_ok = phi
        .par_iter()
        .enumerate()
        .all(|(x, &y)| q_mod(y as u64, n) == x as u64);
    if !inverse_ok {
        return Err(Error::falsified("Q_n inverts Phi_n", format!("n = {n}")));
    }
    let odd_ok = phi.par_iter().enumerate().all(|(x, &y)| (x & 1) as u32 == (y & 1));
    let mut seen = vec![false; size];
    let mut order = BigUint::one();
    let mut lengths = std::collections::BTreeSet::new();
    let mut cycles = 0u64;
    for start in 0..size {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            v = phi[v] as usize;
            len += 1;
        }
        // a bijection returns to the start
        debug_assert_eq!(v, start);
        cycles += 1;
        lengths.insert(len);
    }
    for len in lengths {
        order = order.lcm(&BigUint::from(len));
    }
    let fixed_points: Vec<u64> = (0..size as u64).filter(|&x| phi[x as usize] as u64 == x).collect();
    Ok(PermAnalysis {
        n,
        order,
        cycle_count: cycles,
        fixed_point_count: fixed_points.len() as u64,
        fixed_points,
        inverse_checked: true,
        odd_restriction_permutes: odd_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugacyReport {
    pub n: u32,
    /// Residues checked mod `2^n`; comparison is mod `2^(n-1)`.
    pub checked: u64,
    pub passed: bool,
}

/// Checks `T(Phi(x)) = Phi(S(x)) mod 2^(n-1)` for every `x mod 2^n`.
pub fn conjugacy_check(n: u32) -> Result<ConjugacyReport> {
    if !(4..=MAX_PERM_BITS).contains(&n) {
        return Err(Error::usage(format!("conjugacy check needs 4 <= n <= {MAX_PERM_BITS}")));
    }
    let table = neg_inv3_table(n);
    let low = mask(n - 1);
    let bad = (0..1u64 << n).into_par_iter().find_first(|&x| {
        let lhs = t_res(phi_with(x, n, &table), n);
        let rhs = phi_with(shift(x), n, &table) & low;
        lhs != rhs
    });
    if let Some(x) = bad {
        return Err(Error::falsified("T o Phi = Phi o S", format!("x = {x} mod 2^{n}")));
    }
    Ok(ConjugacyReport {
        n,
        checked: 1 << n,
        passed: true,
    })
}
