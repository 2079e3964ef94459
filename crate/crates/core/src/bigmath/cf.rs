//! Continued fractions of `log2 3` and of rationals.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::fixed::{self, FixedInterval};
use crate::error::{Error, Result};

/// Largest depth accepted by [`cf_log2_3`].
pub const DEFAULT_DEPTH_CAP: usize = 64;

/// Convergents with denominators up to this bound are re-checked by exact
/// power comparison inside [`cf_log2_3`].
pub const EXACT_CERTIFY_MAX_DENOMINATOR: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CfTarget {
    Log2Of3,
    RationalValue(BigInt, BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub p: BigUint,
    pub q: BigUint,
    /// `true` for full convergents, `false` for intermediate ones.
    pub principal: bool,
    /// Index of the principal convergent this one follows (or is).
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub target: CfTarget,
    pub partial_quotients: Vec<BigUint>,
}

impl ContinuedFraction {
    pub fn len(&self) -> usize {
        self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_quotients.is_empty()
    }

    /// Principal convergents `p_n/q_n` for `n = 0..len`.
    pub fn principal(&self) -> Vec<(BigUint, BigUint)> {
        let mut out = Vec::with_capacity(self.len());
        let (mut p0, mut q0) = (BigUint::one(), BigUint::zero());
        let (mut p1, mut q1) = (BigUint::zero(), BigUint::one());
        for a in &self.partial_quotients {
            let p = a * &p0 + &p1;
            let q = a * &q0 + &q1;
            p1 = std::mem::replace(&mut p0, p.clone());
            q1 = std::mem::replace(&mut q0, q.clone());
            out.push((p, q));
        }
        out
    }

    /// The `n`-th principal convergent.
    pub fn convergent(&self, n: usize) -> Result<(BigUint, BigUint)> {
        if n >= self.len() {
            return Err(Error::usage(format!(
                "convergent {n} requested but only {} partial quotients are available",
                self.len()
            )));
        }
        Ok(self.principal().swap_remove(n))
    }
}

/// Convergents in increasing-denominator order, optionally interleaving the
/// intermediate convergents `(p_{n-1} + i p_n) / (q_{n-1} + i q_n)`,
/// `1 <= i < a_{n+1}`, between `p_n/q_n` and `p_{n+1}/q_{n+1}`.
pub fn convergents(cf: &ContinuedFraction, include_intermediate: bool) -> Vec<Convergent> {
    let principal = cf.principal();
    let mut out = Vec::new();
    for (n, (p, q)) in principal.iter().enumerate() {
        if include_intermediate && n >= 2 {
            let (pm, qm) = &principal[n - 1];
            let (pmm, qmm) = &principal[n - 2];
            let a = &cf.partial_quotients[n];
            let mut i = BigUint::one();
            while &i < a {
                out.push(Convergent {
                    p: pmm + &i * pm,
                    q: qmm + &i * qm,
                    principal: false,
                    index: n - 1,
                });
                i += 1u32;
            }
        }
        out.push(Convergent {
            p: p.clone(),
            q: q.clone(),
            principal: true,
            index: n,
        });
    }
    out
}

/// Expansion of a rational `num/den` (`den > 0`).
pub fn cf_rational(num: &BigInt, den: &BigInt) -> Result<ContinuedFraction> {
    if den <= &BigInt::zero() {
        return Err(Error::usage("continued fraction needs a positive denominator"));
    }
    if num < &BigInt::zero() {
        return Err(Error::usage("continued fraction of a negative value is not supported"));
    }
    let mut quotients = Vec::new();
    let (mut a, mut b) = (num.clone(), den.clone());
    while !b.is_zero() {
        let (q, r) = a.div_mod_floor(&b);
        quotients.push(q.to_biguint().expect("nonnegative"));
        a = std::mem::replace(&mut b, r);
    }
    Ok(ContinuedFraction {
        target: CfTarget::RationalValue(num.clone(), den.clone()),
        partial_quotients: quotients,
    })
}

/// Partial quotients shared by every real number in a fixed-point enclosure.
fn common_quotients(x: &FixedInterval, want: usize) -> Vec<BigUint> {
    let den = BigInt::one() << x.frac_bits as usize;
    let (mut a0, mut b0) = (x.lo.clone(), den.clone());
    let (mut a1, mut b1) = (x.hi.clone(), den);
    let mut out = Vec::new();
    while out.len() < want && !b0.is_zero() && !b1.is_zero() {
        let (q0, r0) = a0.div_mod_floor(&b0);
        let (q1, r1) = a1.div_mod_floor(&b1);
        if q0 != q1 || r0.is_zero() || r1.is_zero() {
            break;
        }
        out.push(q0.to_biguint().expect("positive"));
        a0 = std::mem::replace(&mut b0, r0);
        a1 = std::mem::replace(&mut b1, r1);
    }
    out
}

/// First `depth` partial quotients of `log2 3`.
///
/// Quotients are read off a certified enclosure of `log2 3` (refined until
/// both endpoints agree on `depth` quotients), and every resulting convergent
/// with denominator at most [`EXACT_CERTIFY_MAX_DENOMINATOR`] is re-checked
/// by comparing `2^p` with `3^q` exactly.
pub fn cf_log2_3(depth: usize) -> Result<ContinuedFraction> {
    cf_log2_3_capped(depth, DEFAULT_DEPTH_CAP)
}

pub fn cf_log2_3_capped(depth: usize, cap: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::usage("depth must be at least 1"));
    }
    if depth > cap {
        return Err(Error::usage(format!("depth {depth} exceeds the cap of {cap}")));
    }
    let mut bits = fixed::DEFAULT_FRAC_BITS;
    let quotients = loop {
        let q = common_quotients(&fixed::log2_3(bits), depth);
        if q.len() >= depth {
            break q;
        }
        bits *= 2;
    };
    let cf = ContinuedFraction {
        target: CfTarget::Log2Of3,
        partial_quotients: quotients,
    };
    certify_small_convergents(&cf)?;
    Ok(cf)
}

/// Even-indexed convergents of `log2 3` lie below it (`2^p < 3^q`), odd ones above.
fn certify_small_convergents(cf: &ContinuedFraction) -> Result<()> {
    use num_traits::ToPrimitive;
    use std::cmp::Ordering;
    for (n, (p, q)) in cf.principal().iter().enumerate() {
        let (Some(p), Some(q)) = (p.to_u64(), q.to_u64()) else {
            break;
        };
        if q > EXACT_CERTIFY_MAX_DENOMINATOR {
            break;
        }
        let expect = if n % 2 == 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        };
        if fixed::cmp_pow2_pow3(p, q) != expect {
            return Err(Error::falsified(
                "convergent side of log2 3",
                format!("n={n}, p={p}, q={q}"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn rational_seven_thirds() {
        let cf = cf_rational(&BigInt::from(7), &BigInt::from(3)).unwrap();
        assert_eq!(cf.partial_quotients, vec![u(2), u(3)]);
        let c = cf.principal();
        assert_eq!(c, vec![(u(2), u(1)), (u(7), u(3))]);
    }

    #[test]
    fn depth_bounds() {
        assert!(cf_log2_3(0).is_err());
        assert!(cf_log2_3(65).is_err());
        assert!(cf_log2_3_capped(70, 80).is_ok());
    }

    #[test]
    fn convergent_out_of_range() {
        let cf = cf_log2_3(4).unwrap();
        assert!(cf.convergent(3).is_ok());
        assert!(cf.convergent(4).is_err());
    }

    #[test]
    fn intermediate_convergents_sorted() {
        let cf = cf_log2_3(12).unwrap();
        let all = convergents(&cf, true);
        for w in all.windows(2) {
            assert!(w[0].q <= w[1].q, "{:?}", w);
        }
        // 1539/971 and 2593/1636 sit between 485/306 and 24727/15601
        assert!(all.iter().any(|c| c.p == u(2593) && c.q == u(1636) && !c.principal));
    }
}
