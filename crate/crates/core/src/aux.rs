//! Satellite problems: spiral permutations, Z-number candidates, the Stemmler
//! inequality and primitive 3-smooth representations.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::queneau_delta as delta;

// ---------------------------------------------------------------- Queneau

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoubaudClass {
    /// 2 is a primitive root mod `2n+1`.
    PrimitiveRoot,
    /// `ord(2) = n` and `n = 3 mod 4`.
    HalfOrderMod4Three,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueneauReport {
    pub n: u64,
    pub admissible: bool,
    pub p: u64,
    pub p_prime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ord_p_2: Option<u64>,
    pub roubaud_class: RoubaudClass,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn order_of_two(p: u64) -> u64 {
    let mut x = 2 % p;
    let mut k = 1;
    while x != 1 {
        x = x * 2 % p;
        k += 1;
    }
    k
}

/// Whether the spiral permutation of `{1..n}` is a single `n`-cycle, by walking it.
pub fn queneau_admissible(n: u64) -> bool {
    let mut x = 1i128;
    let mut len = 0u64;
    loop {
        x = delta(n as i128, x);
        len += 1;
        if x == 1 {
            return len == n;
        }
    }
}

pub fn queneau_report(n: u64) -> Result<QueneauReport> {
    if n == 0 || n > 1 << 31 {
        return Err(Error::usage("spiral permutation needs 1 <= n <= 2^31"));
    }
    let p = 2 * n + 1;
    let p_prime = is_prime(p);
    let ord = p_prime.then(|| order_of_two(p));
    let roubaud_class = match ord {
        Some(o) if o == 2 * n => RoubaudClass::PrimitiveRoot,
        Some(o) if o == n && n % 4 == 3 => RoubaudClass::HalfOrderMod4Three,
        _ => RoubaudClass::Neither,
    };
    Ok(QueneauReport {
        n,
        admissible: queneau_admissible(n),
        p,
        p_prime,
        ord_p_2: ord,
        roubaud_class,
    })
}

pub fn queneau_admissible_up_to(n_max: u64) -> Vec<u64> {
    (1..=n_max).into_par_iter().filter(|&n| queneau_admissible(n)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoubaudCheck {
    pub n_max: u64,
    pub admissible: u64,
    /// `n` where admissibility and the predicted class disagree.
    pub mismatches: Vec<QueneauReport>,
}

/// Compares admissibility with "primitive root, or order n with n = 3 mod 4".
pub fn roubaud_check(n_max: u64) -> Result<RoubaudCheck> {
    if n_max > 100_000 {
        return Err(Error::usage("Roubaud check is limited to n <= 10^5"));
    }
    let reports: Vec<QueneauReport> = (1..=n_max)
        .into_par_iter()
        .map(queneau_report)
        .collect::<Result<_>>()?;
    let admissible = reports.iter().filter(|r| r.admissible).count() as u64;
    let mismatches = reports
        .into_iter()
        .filter(|r| r.admissible != (r.roubaud_class != RoubaudClass::Neither))
        .collect();
    Ok(RoubaudCheck {
        n_max,
        admissible,
        mismatches,
    })
}

// ---------------------------------------------------------------- Z-numbers

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScan {
    pub x: u64,
    pub step_budget: u64,
    /// `n` whose orbit avoided `3 mod 4` for the whole budget.
    pub candidates: Vec<u64>,
    pub fit_depth: f64,
    /// `(X_i, #{n <= X_i surviving ceil(fit_depth log2 X_i) steps})` at powers of two.
    pub counts: Vec<(u64, u64)>,
    /// Least-squares slope of `ln count` against `ln X_i`.
    pub exponent: Option<f64>,
}

/// Steps before the orbit of `n` under `x -> (3x+1)/2` (odd), `3x/2` (even) hits
/// `3 mod 4`, or `None` if it survives `budget` steps.
pub fn mahler_exit(n: u64, budget: u64) -> Option<u64> {
    let mut x = n as u128;
    for k in 0..=budget {
        if x & 3 == 3 {
            return Some(k);
        }
        if k == budget {
            break;
        }
        if x > u128::MAX / 4 {
            return mahler_exit_big(BigUint::from(x), k, budget);
        }
        x = if x & 1 == 1 { (3 * x + 1) / 2 } else { 3 * x / 2 };
    }
    None
}

fn mahler_exit_big(mut x: BigUint, from: u64, budget: u64) -> Option<u64> {
    let three = BigUint::from(3u32);
    for k in from..=budget {
        if (&x & &three) == three {
            return Some(k);
        }
        if k == budget {
            break;
        }
        x = if x.bit(0) { (&x * 3u32 + 1u32) >> 1 } else { (&x * 3u32) >> 1 };
    }
    None
}

fn steps_for(depth: f64, x: u64) -> u64 {
    (depth * (x as f64).log2()).ceil() as u64
}

/// Scan `1..=x`. Candidates survive `depth log2 x` steps; the growth exponent is fitted
/// to survivor counts under the shorter budget `fit_depth log2 X_i`.
pub fn znumber_scan(x: u64, depth: f64, fit_depth: f64) -> Result<ZScan> {
    if !(16..=100_000_000).contains(&x) {
        return Err(Error::usage("Z-number scan needs 16 <= X <= 10^8"));
    }
    if !(depth > 0.0 && depth <= 100.0 && fit_depth > 0.0 && fit_depth <= depth) {
        return Err(Error::usage("need 0 < fit_depth <= depth <= 100"));
    }
    let budget = steps_for(depth, x);
    // exit step, with budget + 1 standing for survival
    let exits: Vec<u64> = (1..=x)
        .into_par_iter()
        .map(|n| mahler_exit(n, budget).unwrap_or(budget + 1))
        .collect();
    let candidates: Vec<u64> = (1..=x).filter(|&n| exits[n as usize - 1] > budget).collect();
    let mut counts = Vec::new();
    let mut m = 16u64;
    while m <= x {
        let need = steps_for(fit_depth, m);
        counts.push((m, exits[..m as usize].iter().filter(|&&e| e > need).count() as u64));
        m *= 2;
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(m, c)| ((m as f64).ln(), (c as f64).ln()))
        .collect();
    let exponent = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(ZScan {
        x,
        step_budget: budget,
        candidates,
        fit_depth,
        counts,
        exponent,
    })
}

// ---------------------------------------------------------------- Stemmler

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StemmlerRow {
    pub k: u64,
    /// `3^k mod 2^k`, so the fractional part of `(3/2)^k` is `frac_num / 2^k`.
    #[serde(with = "crate::report::decimal")]
    pub frac_num: BigUint,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StemmlerReport {
    pub k_lo: u64,
    pub k_hi: u64,
    pub passed: u64,
    pub failures: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<StemmlerRow>,
}

/// Checks `{(3/2)^k} < 1 - (3/4)^k`, i.e. `(3^k mod 2^k) 2^k < 4^k - 3^k`, exactly.
pub fn stemmler_verify(k_lo: u64, k_hi: u64, keep_rows: bool) -> Result<StemmlerReport> {
    if k_lo == 0 || k_lo > k_hi || k_hi > 10_000 {
        return Err(Error::usage("need 1 <= k_lo <= k_hi <= 10^4"));
    }
    let rows: Vec<StemmlerRow> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let p3 = num_traits::pow(BigUint::from(3u32), k as usize);
            let mask = (BigUint::one() << k) - 1u32;
            let r = &p3 & &mask;
            let four = BigUint::one() << (2 * k);
            let pass = (&r << k) < four - &p3;
            StemmlerRow { k, frac_num: r, pass }
        })
        .collect();
    let failures: Vec<u64> = rows.iter().filter(|r| !r.pass).map(|r| r.k).collect();
    Ok(StemmlerReport {
        k_lo,
        k_hi,
        passed: rows.len() as u64 - failures.len() as u64,
        failures,
        rows: if keep_rows { rows } else { Vec::new() },
    })
}

// ---------------------------------------------------------------- 3-smooth sums

/// A term `2^a 3^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SmoothTerm {
    pub a: u32,
    pub b: u32,
}

impl SmoothTerm {
    pub fn value(&self) -> u128 {
        (1u128 << self.a) * 3u128.pow(self.b)
    }
}

/// All primitive representations of `n` (no term divides another), each sorted by
/// increasing power of 2, stopping after `limit` of them.
///
/// In such a sum the powers of 2 increase exactly when the powers of 3 decrease, so
/// the term with the least power of 2 is forced to carry `2^v2(n)`.
pub fn smooth_reps(n: u64, limit: usize) -> Result<Vec<Vec<SmoothTerm>>> {
    if n == 0 || n > 1_000_000 {
        return Err(Error::usage("smooth representations need 1 <= n <= 10^6"));
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    smooth_dfs(n as u128, 0, u32::MAX, &mut cur, &mut out, limit);
    out.sort();
    Ok(out)
}

fn smooth_dfs(
    rem: u128,
    min_a: u32,
    max_b: u32,
    cur: &mut Vec<SmoothTerm>,
    out: &mut Vec<Vec<SmoothTerm>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if rem == 0 {
        out.push(cur.clone());
        return;
    }
    let a = rem.trailing_zeros();
    if a < min_a {
        return;
    }
    let mut b = 0u32;
    let mut t = 1u128 << a;
    while t <= rem && b < max_b {
        cur.push(SmoothTerm { a, b });
        smooth_dfs(rem - t, a + 1, b, cur, out, limit);
        cur.pop();
        b += 1;
        t *= 3;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothWitness {
    pub m: u64,
    pub e: u32,
    pub f: u32,
    /// `2^e - 3^f m`.
    #[serde(with = "crate::report::decimal")]
    pub n: u128,
    /// Term `j` is `3^j 2^(t_j)`, `j = 0..f`.
    pub terms: Vec<SmoothTerm>,
    pub forward_reaches_one: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SmoothCheck {
    Found(SmoothWitness),
    /// Nothing within `e <= e_max`, `f <= f_max`; not a disproof.
    Inconclusive { m: u64, e_max: u32, f_max: u32, forward_reaches_one: bool },
}

/// Writes `n` as `sum_{j<f} 3^j 2^(t_j)` with `t_0 > t_1 > ...`, if possible. The least
/// power of 2 must sit on the `3^(f-1)` term, so the split is forced.
pub fn smooth_ladder(mut n: u128, f: u32) -> Option<Vec<SmoothTerm>> {
    let mut terms = Vec::with_capacity(f as usize);
    for j in (0..f).rev() {
        if n == 0 {
            return None;
        }
        let t = n.trailing_zeros();
        let v = (1u128 << t).checked_mul(3u128.checked_pow(j)?)?;
        if v > n {
            return None;
        }
        n -= v;
        terms.push(SmoothTerm { a: t, b: j });
    }
    (n == 0).then(|| {
        terms.reverse();
        terms
    })
}

fn reaches_one(m: u64) -> bool {
    crate::stats::orbit_u64(m, 1_000_000).is_some()
}

/// Searches `(e, f)` with `2^e - 3^f m >= 1` having the ladder representation.
pub fn collatz_smooth_check(m: u64, e_max: u32, f_max: u32) -> Result<SmoothCheck> {
    if m == 0 || m > 10_000 {
        return Err(Error::usage("smooth witness search needs 1 <= m <= 10^4"));
    }
    if e_max > 120 || f_max > 70 {
        return Err(Error::usage("search bounds must satisfy e <= 120 and f <= 70"));
    }
    let forward = reaches_one(m);
    for e in 0..=e_max {
        let pe = 1u128 << e;
        for f in 1..=f_max {
            let Some(sub) = 3u128.checked_pow(f).and_then(|p| p.checked_mul(m as u128)) else {
                break;
            };
            if sub >= pe {
                break;
            }
            let n = pe - sub;
            if let Some(terms) = smooth_ladder(n, f) {
                return Ok(SmoothCheck::Found(SmoothWitness {
                    m,
                    e,
                    f,
                    n,
                    terms,
                    forward_reaches_one: forward,
                }));
            }
        }
    }
    Ok(SmoothCheck::Inconclusive {
        m,
        e_max,
        f_max,
        forward_reaches_one: forward,
    })
}

impl SmoothCheck {
    pub fn found(&self) -> bool {
        matches!(self, SmoothCheck::Found(_))
    }
}

#[allow(dead_code)]
fn sum_terms(terms: &[SmoothTerm]) -> u128 {
    terms.iter().map(|t| t.value()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUENEAU_100: [u64; 31] = [
        1, 2, 3, 5, 6, 9, 11, 14, 18, 23, 26, 29, 30, 33, 35, 39, 41, 50, 51, 53, 65, 69, 74, 81, 83, 86, 89, 90, 95,
        98, 99,
    ];

    #[test]
    fn queneau_small() {
        assert!(queneau_report(6).unwrap().admissible);
        assert!(!queneau_report(4).unwrap().admissible);
        assert_eq!(queneau_admissible_up_to(100), QUENEAU_100);
    }

    #[test]
    fn bringer_conditions() {
        for n in 1..=3000 {
            let r = queneau_report(n).unwrap();
            if r.admissible {
                assert!(r.p_prime, "n={n}");
            }
            if r.roubaud_class == RoubaudClass::PrimitiveRoot {
                assert!(r.admissible, "n={n}");
            }
        }
    }

    #[test]
    fn mahler_orbit_of_one() {
        // 1, 2, 3: exits at once on 3
        assert_eq!(mahler_exit(1, 100), Some(2));
        assert_eq!(mahler_exit(27, 100), Some(0));
        let s = znumber_scan(1 << 12, 10.0, 1.0).unwrap();
        assert!(!s.candidates.contains(&1));
        assert!(s.candidates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stemmler_small() {
        let r = stemmler_verify(2, 5, true).unwrap();
        assert!(r.rows.iter().all(|x| x.pass));
        assert_eq!(r.rows[0].frac_num, BigUint::from(1u32));
        assert_eq!(r.rows[3].frac_num, BigUint::from(19u32));
        assert!(!stemmler_verify(1, 1, false).unwrap().failures.is_empty());
    }

    #[test]
    fn smooth_small() {
        let five = smooth_reps(5, 100).unwrap();
        assert!(five.contains(&vec![SmoothTerm { a: 0, b: 1 }, SmoothTerm { a: 1, b: 0 }]));
        assert_eq!(smooth_reps(1, 100).unwrap(), vec![vec![SmoothTerm { a: 0, b: 0 }]]);
        // brute-force comparison on small n
        for n in 1..=60u64 {
            let reps = smooth_reps(n, 1 << 20).unwrap();
            for r in &reps {
                assert_eq!(sum_terms(r), n as u128);
                for (i, x) in r.iter().enumerate() {
                    for y in &r[i + 1..] {
                        assert!(x.a < y.a && x.b > y.b);
                    }
                }
            }
            assert_eq!(reps.len(), brute_count(n), "n={n}");
        }
    }

    fn brute_count(n: u64) -> usize {
        let terms: Vec<SmoothTerm> = (0..8)
            .flat_map(|a| (0..5).map(move |b| SmoothTerm { a, b }))
            .filter(|t| t.value() <= n as u128)
            .collect();
        let mut count = 0;
        for mask in 0u64..1 << terms.len() {
            let chosen: Vec<&SmoothTerm> = (0..terms.len()).filter(|i| mask >> i & 1 == 1).map(|i| &terms[i]).collect();
            if chosen.iter().map(|t| t.value()).sum::<u128>() != n as u128 {
                continue;
            }
            let primitive = chosen
                .iter()
                .all(|x| chosen.iter().all(|y| x == y || !(x.a <= y.a && x.b <= y.b)));
            count += primitive as usize;
        }
        count
    }

    #[test]
    fn smooth_witness_for_one() {
        match collatz_smooth_check(1, 20, 10).unwrap() {
            SmoothCheck::Found(w) => {
                assert_eq!((w.e, w.f, w.n), (2, 1, 1));
                assert!(w.forward_reaches_one);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn smooth_iff_reaches_one() {
        for m in (1..=99u64).step_by(2) {
            let c = collatz_smooth_check(m, 120, 70).unwrap();
            assert!(c.found(), "m={m}");
        }
    }
}
