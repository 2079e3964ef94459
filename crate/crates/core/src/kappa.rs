//! Coefficient stopping time `kappa` and a checker for `kappa(n) = sigma(n)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::pow_u;
use crate::error::{Error, Result};
use crate::parity::ParityVector;
use crate::stats::{stopping_time, t_step_big};

/// Largest bound accepted by [`verify_cstc`].
pub const MAX_CSTC_BOUND: u64 = 20_000;

/// `bits(3^a)`: the least `k` with `3^a < 2^k`.
fn kappa_threshold(a: u64) -> u64 {
    if a == 0 {
        1
    } else {
        pow_u(3, a).bits()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaRecord {
    #[serde(with = "crate::report::decimal")]
    pub n: BigUint,
    pub kappa: Option<u64>,
    pub a: u64,
    #[serde(with = "crate::report::rational")]
    pub alpha: BigRational,
    #[serde(with = "crate::report::rational")]
    pub beta: BigRational,
    pub sigma: Option<u64>,
    pub parity: ParityVector,
}

/// `kappa`, `alpha = 3^a/2^kappa` and `beta` with `T^kappa(n) = alpha n + beta`.
pub fn kappa_record(n: &BigUint, step_limit: u64) -> Result<KappaRecord> {
    if *n < BigUint::from(2u32) {
        return Err(Error::usage("kappa needs n >= 2"));
    }
    let mut x = n.clone();
    let mut a = 0u64;
    let mut k = 0u64;
    let mut parity = ParityVector::new();
    let mut sigma = None;
    let mut kappa = None;
    let mut at_kappa = None;
    while k < step_limit {
        let odd = x.bit(0);
        if kappa.is_none() {
            parity.push(odd);
        }
        a += odd as u64;
        t_step_big(&mut x);
        k += 1;
        if kappa.is_none() && k >= kappa_threshold(a) {
            kappa = Some(k);
            at_kappa = Some((x.clone(), a));
        }
        if sigma.is_none() && x < *n {
            sigma = Some(k);
        }
        if kappa.is_some() && sigma.is_some() {
            break;
        }
    }
    let (alpha, beta, a_k) = match (kappa, at_kappa) {
        (Some(kk), Some((tk, ak))) => {
            let alpha = BigRational::new(BigInt::from(pow_u(3, ak)), BigInt::one() << kk);
            let beta = BigRational::from_integer(BigInt::from(tk)) - &alpha * BigInt::from(n.clone());
            debug_assert_eq!(beta, beta_of_word(&parity));
            (alpha, beta, ak)
        }
        _ => (BigRational::one(), BigRational::zero(), a),
    };
    Ok(KappaRecord {
        n: n.clone(),
        kappa,
        a: a_k,
        alpha,
        beta,
        sigma,
        parity,
    })
}

/// `beta` of a parity word: `sum 3^(a-1-i) 2^(v_i) / 2^k` over the ones `v_0 < v_1 < ..`.
pub fn beta_of_word(word: &ParityVector) -> BigRational {
    let ones = word.one_positions();
    let a = ones.len() as u64;
    let mut num = BigInt::zero();
    for (i, &v) in ones.iter().enumerate() {
        num += BigInt::from(pow_u(3, a - 1 - i as u64)) << v;
    }
    BigRational::new(num, BigInt::one() << word.len())
}

/// One `(a, k)` pair with `2^(k-1) < 3^a < 2^k`, the only shape `kappa = k` allows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPair {
    pub k: u64,
    pub a: u64,
    /// Every `n` with `kappa(n) = k` and `sigma(n) > k` satisfies `n <= bound`.
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CstcReport {
    pub max_kappa: u64,
    pub verified: bool,
    /// Largest per-pair bound; every `n` up to it was checked directly.
    pub checked_up_to: u64,
    /// Pairs with the largest bounds, in increasing `k`.
    pub critical_pairs: Vec<CriticalPair>,
    pub pairs_examined: u64,
    pub counterexample: Option<u64>,
    pub method: Vec<String>,
}

fn method_notes() -> Vec<String> {
    [
        "kappa(n) = k forces the k-th step even and 2^(k-1) < 3^a < 2^k, so a is fixed by k",
        "T^k(n) = alpha n + beta with alpha = 3^a/2^k and beta = alpha * sum_i 2^(v_i)/3^(i+1)",
        "the prefix condition 3^i > 2^(v_i) gives v_i <= floor(i log2 3), so beta/alpha <= S_a = N_a/3^a",
        "sigma(n) > kappa(n) needs alpha n + beta >= n, hence n <= N_a / (2^k - 3^a)",
        "all n up to the largest such bound are checked directly for kappa(n) = sigma(n)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Certifies `kappa(n) = sigma(n)` for every `n` with `kappa(n) <= max_kappa`.
pub fn verify_cstc(max_kappa: u64) -> Result<CstcReport> {
    if max_kappa == 0 || max_kappa > MAX_CSTC_BOUND {
        return Err(Error::usage(format!("kappa bound must be in 1..={MAX_CSTC_BOUND}")));
    }
    // N_a = sum_{i<a} 2^(v_i) 3^(a-1-i) with v_i = floor(i log2 3).
    let mut pairs = Vec::new();
    let mut num = BigUint::zero();
    let mut pow3 = BigUint::one();
    let mut a = 0u64;
    let mut examined = 0u64;
    for k in 1..=max_kappa {
        // advance a while 3^(a+1) < 2^k
        while (&pow3 * 3u32).bits() <= k {
            let v = if a == 0 { 0 } else { pow3.bits() - 1 };
            num = num * 3u32 + (BigUint::one() << v);
            pow3 *= 3u32;
            a += 1;
        }
        // now 3^a < 2^k <= 3^(a+1); need 3^a > 2^(k-1) as well
        if pow3.bits() != k {
            continue;
        }
        examined += 1;
        let gap = (BigUint::one() << k) - &pow3;
        let bound = (&num / &gap).to_u64().unwrap_or(u64::MAX);
        pairs.push(CriticalPair { k, a, bound });
    }
    let checked_up_to = pairs.iter().map(|p| p.bound).max().unwrap_or(0);
    if checked_up_to > 1 << 34 {
        return Err(Error::usage(format!(
            "direct range {checked_up_to} is beyond desk scale for this bound"
        )));
    }
    let counterexample = (2..checked_up_to.max(2) + 1)
        .into_par_iter()
        .filter(|&n| {
            let (kappa, sigma) = kappa_sigma_u64(n, max_kappa);
            kappa.is_some_and(|k| k <= max_kappa) && kappa != sigma
        })
        .min();
    let mut critical: Vec<CriticalPair> = pairs.clone();
    critical.sort_by(|x, y| y.bound.cmp(&x.bound).then(x.k.cmp(&y.k)));
    critical.truncate(12);
    critical.sort_by_key(|p| p.k);
    Ok(CstcReport {
        max_kappa,
        verified: counterexample.is_none(),
        checked_up_to,
        critical_pairs: critical,
        pairs_examined: examined,
        counterexample,
        method: method_notes(),
    })
}

/// `(kappa(n), sigma(n))` by direct iteration; kappa is left `None` past `max_kappa`.
pub fn kappa_sigma_u64(n: u64, max_kappa: u64) -> (Option<u64>, Option<u64>) {
    let mut x = n as u128;
    let mut a = 0u64;
    let mut k = 0u64;
    let mut kappa = None;
    let mut threshold = 1u64;
    while k < max_kappa {
        if x & 1 == 1 {
            a += 1;
            threshold = kappa_threshold_cached(a);
        }
        x = match crate::stats::t_step_u128(x) {
            Some(y) => y,
            None => break,
        };
        k += 1;
        if k >= threshold {
            kappa = Some(k);
            break;
        }
    }
    (kappa, stopping_time(n, 1_000_000))
}

fn kappa_threshold_cached(a: u64) -> u64 {
    // bits(3^a) = floor(a log2 3) + 1; exact via integers for a this small.
    thread_local! {
        static TABLE: std::cell::RefCell<Vec<u64>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    TABLE.with(|t| {
        let mut t = t.borrow_mut();
        while t.len() as u64 <= a {
            let i = t.len() as u64;
            t.push(kappa_threshold(i));
        }
        t[a as usize]
    })
}

/// Residue classes mod `2^k` with `kappa = j`, by exhaustive check of `n <= 2^k`.
pub fn kappa_classes(k: u32) -> Vec<(u64, Vec<u64>)> {
    let m = 1u64 << k;
    let mut by_j: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
    for n in 2..=m + 1 {
        if let (Some(j), _) = kappa_sigma_u64(n, k as u64) {
            by_j.entry(j).or_default().push(n.mod_floor(&m));
        }
    }
    by_j.into_iter()
        .map(|(j, mut v)| {
            v.sort_unstable();
            v.dedup();
            (j, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigmath::rat;

    fn rec(n: u64) -> KappaRecord {
        kappa_record(&BigUint::from(n), 100_000).unwrap()
    }

    #[test]
    fn small_records() {
        let r = rec(2);
        assert_eq!((r.kappa, r.alpha.clone(), r.beta.clone()), (Some(1), rat(1, 2), rat(0, 1)));
        let r = rec(3);
        assert_eq!((r.kappa, r.a, r.sigma), (Some(4), 2, Some(4)));
        assert_eq!(r.alpha, rat(9, 16));
        assert_eq!(r.parity.to_string(), "1100");
        assert_eq!(r.beta, rat(5, 16));
        let r = rec(27);
        assert_eq!((r.kappa, r.sigma), (Some(59), Some(59)));
    }

    #[test]
    fn affine_identity() {
        for n in 2..3000u64 {
            let r = rec(n);
            assert_eq!(r.beta, beta_of_word(&r.parity), "n={n}");
            assert!(r.kappa <= r.sigma);
        }
    }

    #[test]
    fn cstc_small_bounds() {
        let r = verify_cstc(1).unwrap();
        assert!(r.verified);
        let r = verify_cstc(300).unwrap();
        assert!(r.verified);
        assert!(r.critical_pairs.iter().any(|p| p.k == 65 && p.a == 41));
        assert!(verify_cstc(0).is_err());
    }

    #[test]
    fn kappa_sets_are_congruence_classes() {
        let k = 10u32;
        let m = 1u64 << k;
        for (j, classes) in kappa_classes(k) {
            for n in 2..4 * m {
                let (kj, _) = kappa_sigma_u64(n, k as u64);
                let in_class = classes.binary_search(&(n % m)).is_ok();
                assert_eq!(kj == Some(j), in_class, "n={n} j={j}");
            }
        }
    }
}
