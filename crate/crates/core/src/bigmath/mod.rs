//! Exact integer and rational arithmetic shared by the other modules, plus
//! the `log2 3` continued-fraction machinery behind the cycle bounds.

pub mod cf;
pub mod fixed;

pub use cf::{cf_log2_3, cf_rational, convergents, CfTarget, ContinuedFraction, Convergent};
pub use fixed::FixedInterval;
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

use num_traits::{One, Zero};

/// `base^exp` for a small base.
pub fn pow_u(base: u32, exp: u64) -> BigUint {
    num_traits::pow::pow(BigUint::from(base), exp as usize)
}

pub fn pow_i(base: i64, exp: u64) -> BigInt {
    num_traits::pow::pow(BigInt::from(base), exp as usize)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// Floor of a rational.
pub fn floor_rat(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

pub fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

/// Two-adic valuation of a nonzero integer.
pub fn v2(n: &BigInt) -> u64 {
    assert!(!n.is_zero());
    n.trailing_zeros().unwrap_or(0)
}

/// Render a rational as `p/q`, or `p` when integral.
pub fn rat_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p`, `-p`, or `p/q`.
pub fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}
