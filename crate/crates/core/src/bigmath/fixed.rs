//! Certified binary fixed-point enclosures of logarithmic constants.
//!
//! A [`FixedInterval`] holds integers `lo <= hi` with the guarantee that the
//! real value lies in `[lo / 2^F, hi / 2^F]`. All constants are produced from
//! the `atanh(1/q)` series evaluated with integer floor divisions, so the
//! enclosure is rigorous: no floating point participates in any bound.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Fractional bits of the shared constants.
pub const DEFAULT_FRAC_BITS: u32 = 192;

/// Guard bits carried by the series evaluation beyond the requested precision.
const GUARD_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedInterval {
    pub lo: BigInt,
    pub hi: BigInt,
    pub frac_bits: u32,
}

impl FixedInterval {
    pub fn exact(v: BigInt, frac_bits: u32) -> Self {
        FixedInterval {
            lo: v.clone(),
            hi: v,
            frac_bits,
        }
    }

    /// Width of the enclosure in units of `2^-frac_bits`.
    pub fn width_ulps(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn add(&self, other: &FixedInterval) -> FixedInterval {
        assert_eq!(self.frac_bits, other.frac_bits);
        FixedInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            frac_bits: self.frac_bits,
        }
    }

    /// Multiplication by a nonnegative integer.
    pub fn scale(&self, k: &BigInt) -> FixedInterval {
        assert!(!k.is_negative());
        FixedInterval {
            lo: &self.lo * k,
            hi: &self.hi * k,
            frac_bits: self.frac_bits,
        }
    }

    /// Quotient of two positive enclosures with directed rounding.
    pub fn div(&self, den: &FixedInterval) -> FixedInterval {
        assert_eq!(self.frac_bits, den.frac_bits);
        assert!(den.lo.is_positive() && self.lo.is_positive());
        let f = self.frac_bits;
        let lo = (&self.lo << f as usize).div_floor(&den.hi);
        let hi = (&self.hi << f as usize).div_ceil(&den.lo);
        FixedInterval { lo, hi, frac_bits: f }
    }

    /// Re-express with fewer fractional bits, rounding outward.
    pub fn truncate(&self, frac_bits: u32) -> FixedInterval {
        assert!(frac_bits <= self.frac_bits);
        let shift = BigInt::one() << (self.frac_bits - frac_bits) as usize;
        FixedInterval {
            lo: self.lo.div_floor(&shift),
            hi: self.hi.div_ceil(&shift),
            frac_bits,
        }
    }

    /// Sign of `value - p/q`, when the enclosure decides it.
    pub fn cmp_rational(&self, p: &BigInt, q: &BigInt) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        let scaled = p << self.frac_bits as usize;
        let lo = &self.lo * q;
        let hi = &self.hi * q;
        if lo > scaled {
            Some(Greater)
        } else if hi < scaled {
            Some(Less)
        } else {
            None
        }
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64(&self.lo, self.frac_bits)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64(&self.hi, self.frac_bits)
    }

    pub fn mid_f64(&self) -> f64 {
        to_f64(&((&self.lo + &self.hi) >> 1usize), self.frac_bits)
    }
}

fn to_f64(v: &BigInt, frac_bits: u32) -> f64 {
    // Keep 80 significant bits before handing to the float conversion.
    let bits = v.bits();
    let (m, e) = if bits > 80 {
        let s = bits - 80;
        (v >> s as usize, s as i64 - frac_bits as i64)
    } else {
        (v.clone(), -(frac_bits as i64))
    };
    let mf: f64 = num_traits::ToPrimitive::to_f64(&m).unwrap_or(f64::NAN);
    mf * 2f64.powi(e as i32)
}

/// Enclosure of `atanh(1/q)` for an integer `q >= 2`.
pub fn atanh_inv(q: &BigUint, frac_bits: u32) -> FixedInterval {
    assert!(*q >= BigUint::from(2u32));
    let w = frac_bits + GUARD_BITS;
    let q2 = q * q;
    // power = floor(2^w / q^(2k+1)); nested floors are exact floors.
    let mut power: BigUint = (BigUint::one() << w as usize) / q;
    let mut sum = BigUint::zero();
    let mut terms: u64 = 0;
    let mut k: u64 = 0;
    while !power.is_zero() {
        sum += &power / BigUint::from(2 * k + 1);
        terms += 1;
        power /= &q2;
        k += 1;
    }
    // Each floor loses < 1 ulp; once power hits 0 the omitted tail is < 4/3 ulp.
    let lo = BigInt::from_biguint(Sign::Plus, sum.clone());
    let hi = BigInt::from_biguint(Sign::Plus, sum + BigUint::from(terms + 2));
    FixedInterval {
        lo,
        hi,
        frac_bits: w,
    }
    .truncate(frac_bits)
}

/// Enclosure of `ln 2 = 2 atanh(1/3)`.
pub fn ln2(frac_bits: u32) -> FixedInterval {
    atanh_inv(&BigUint::from(3u32), frac_bits + 2).scale(&BigInt::from(2)).truncate(frac_bits)
}

/// Enclosure of `log2 3 = 1 + atanh(1/5) / atanh(1/3)`.
pub fn log2_3(frac_bits: u32) -> FixedInterval {
    let w = frac_bits + 8;
    let num = atanh_inv(&BigUint::from(5u32), w);
    let den = atanh_inv(&BigUint::from(3u32), w);
    let ratio = num.div(&den);
    let one = FixedInterval::exact(BigInt::one() << w as usize, w);
    ratio.add(&one).truncate(frac_bits)
}

/// Enclosure of `log2(3 + 1/d) = log2 3 + 2 atanh(1/(6d+1)) / ln 2`.
pub fn log2_3_plus_inv(d: &BigUint, frac_bits: u32) -> FixedInterval {
    assert!(!d.is_zero());
    let w = frac_bits + 8;
    let q = d * 6u32 + 1u32;
    let corr = atanh_inv(&q, w + 1).scale(&BigInt::from(2)).truncate(w);
    let corr = corr.div(&ln2(w));
    log2_3(w).add(&corr).truncate(frac_bits)
}

/// Exact comparison of `2^p` with `3^q`.
pub fn cmp_pow2_pow3(p: u64, q: u64) -> std::cmp::Ordering {
    let three = num_traits::pow::pow(BigUint::from(3u32), q as usize);
    // Compare bit lengths first; only equal lengths need the full compare.
    let tb = three.bits();
    let pb = p + 1;
    if pb != tb {
        return pb.cmp(&tb);
    }
    (BigUint::one() << p as usize).cmp(&three)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_brackets_float_value() {
        let l = ln2(100);
        assert!(l.lo_f64() <= std::f64::consts::LN_2 + 1e-15);
        assert!(l.hi_f64() >= std::f64::consts::LN_2 - 1e-15);
        assert!(l.width_ulps() < BigInt::from(8));
    }

    #[test]
    fn log2_3_is_tight_at_192_bits() {
        let l = log2_3(DEFAULT_FRAC_BITS);
        // width <= 4 ulps at 2^-192 means error <= 2^-190
        assert!(l.width_ulps() <= BigInt::from(4), "{}", l.width_ulps());
        assert!((l.mid_f64() - 3f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn log2_3_plus_inv_exceeds_log2_3() {
        let d = BigUint::from(1000u32);
        let a = log2_3_plus_inv(&d, 128);
        let b = log2_3(128);
        assert!(a.lo > b.hi);
        assert!((a.mid_f64() - (3.0f64 + 1e-3).log2()).abs() < 1e-14);
    }

    #[test]
    fn power_comparison() {
        use std::cmp::Ordering::*;
        assert_eq!(cmp_pow2_pow3(1, 1), Less);
        assert_eq!(cmp_pow2_pow3(2, 1), Greater);
        assert_eq!(cmp_pow2_pow3(0, 0), Equal);
        assert_eq!(cmp_pow2_pow3(485, 306), Greater);
        assert_eq!(cmp_pow2_pow3(1054, 665), Less);
    }
}
