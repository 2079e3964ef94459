use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigmath::fixed::{log2_3, log2_3_plus_inv, FixedInterval, DEFAULT_FRAC_BITS};
use std::sync::atomic::{self, AtomicUsize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BoundOptions {
    /// Largest period considered.
    pub cutoff: u64,
    /// Also require the balanced word's minimal element to exceed `D`.
    pub refine: bool,
    /// Maximum number of feasible periods copied into the report.
    pub list_limit: usize,
    /// Give up when the window scan yields more candidates than this.
    pub max_candidates: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            cutoff: 1_000_000_000,
            refine: true,
            list_limit: 1000,
            max_candidates: 5_000_000,
        }
    }
}

/// Minimal element of the cycle of the balanced word with `n` ones in `k` steps,
/// compared against `D`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinElementCheck {
    pub n: u64,
    pub k: u64,
    /// Lower end of the enclosure, six decimals.
    pub min_element: String,
    /// `None` when the enclosure could not separate it from `D`.
    pub exceeds_d: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleBoundReport {
    #[serde(with = "crate::report::decimal")]
    pub d: BigUint,
    pub cutoff: u64,
    /// First `(n, p)` whose window contains an integer.
    pub window_min_odd_terms: Option<u64>,
    pub window_min_period: Option<u64>,
    /// First window candidate that also survives the minimal-element test
    /// (equal to the window values when refinement is off).
    pub min_odd_terms: Option<u64>,
    pub min_period: Option<u64>,
    pub feasible_count: usize,
    /// Ascending feasible periods from the window test, truncated to the list limit.
    pub feasible_periods: Vec<u64>,
    pub feasible_odd_terms: Vec<u64>,
    pub refinement: Vec<MinElementCheck>,
    pub window_constants: WindowConstants,
    /// Candidates settled by exact integer comparison instead of the enclosures.
    pub exact_checks: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowConstants {
    pub frac_bits: u32,
    pub log2_3: [String; 2],
    pub log2_3_plus_inv_d: [String; 2],
}

fn interval_strings(x: &FixedInterval) -> [String; 2] {
    [fixed_decimal(&x.lo, x.frac_bits, 50), fixed_decimal(&x.hi, x.frac_bits, 50)]
}

/// `v / 2^f` truncated to `digits` decimals.
fn fixed_decimal(v: &BigInt, f: u32, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let t = (v * scale) >> f as usize;
    let s = t.to_string();
    let (ip, fp) = if s.len() > digits {
        s.split_at(s.len() - digits)
    } else {
        return format!("0.{s:0>digits$}");
    };
    format!("{ip}.{fp}")
}

/// Smallest and feasible cycle periods of `T` when every cycle element exceeds `D`.
pub fn cycle_length_lower_bound(d: &BigUint, opts: &BoundOptions) -> Result<CycleBoundReport> {
    if *d < BigUint::from(2u32) {
        return Err(Error::usage("D must be at least 2"));
    }
    if opts.cutoff < 2 || opts.cutoff > 1 << 40 {
        return Err(Error::usage("period cutoff must be in 2..=2^40"));
    }
    let f = DEFAULT_FRAC_BITS;
    let l = log2_3(f);
    let ld = log2_3_plus_inv(d, f);
    let candidates = scan_windows(&l, &ld, opts.cutoff, opts.max_candidates).ok_or_else(|| {
        Error::usage(format!(
            "more than {} window candidates below the cutoff; lower the cutoff or raise D",
            opts.max_candidates
        ))
    })?;
    let mut feasible = Vec::new();
    let mut exact_checks = 0;
    for n in candidates {
        match certify_window(n, &l, &ld, d) {
            Window::Feasible(k, exact) => {
                exact_checks += exact as u64;
                if k <= opts.cutoff {
                    feasible.push((n, k));
                }
            }
            Window::Empty(exact) => exact_checks += exact as u64,
        }
    }
    let window_first = feasible.first().copied();
    let mut refinement = Vec::new();
    let mut refined = None;
    if opts.refine {
        for &(n, k) in &feasible {
            // (gn, gk) repeats the word of (n, k), so the cycle is the same
            let g = n.gcd(&k);
            let check = match refinement.iter().find(|c: &&MinElementCheck| c.n == n / g && c.k == k / g) {
                Some(c) => MinElementCheck { n, k, ..c.clone() },
                None => balanced_min_element(n, k, d)?,
            };
            let pass = check.exceeds_d != Some(false);
            refinement.push(check);
            if pass {
                refined = Some((n, k));
                break;
            }
        }
    } else {
        refined = window_first;
    }
    Ok(CycleBoundReport {
        d: d.clone(),
        cutoff: opts.cutoff,
        window_min_odd_terms: window_first.map(|p| p.0),
        window_min_period: window_first.map(|p| p.1),
        min_odd_terms: refined.map(|p| p.0),
        min_period: refined.map(|p| p.1),
        feasible_count: feasible.len(),
        feasible_periods: feasible.iter().take(opts.list_limit).map(|p| p.1).collect(),
        feasible_odd_terms: feasible.iter().take(opts.list_limit).map(|p| p.0).collect(),
        refinement,
        window_constants: WindowConstants {
            frac_bits: f,
            log2_3: interval_strings(&l),
            log2_3_plus_inv_d: interval_strings(&ld),
        },
        exact_checks,
    })
}

/// Odd-term counts `n` whose window might contain an integer, found with a
/// conservative 128-bit scan of the fractional parts of `n log2 3`.
fn scan_windows(l: &FixedInterval, ld: &FixedInterval, cutoff: u64, max_hits: usize) -> Option<Vec<u64>> {
    let f = l.frac_bits as usize;
    let drop = f - 128;
    let mask = (BigInt::one() << 128usize) - 1;
    // truncations: step <= frac(L) 2^128, width >= (L_D - L) 2^128
    let step = ((&l.lo >> drop) & &mask).to_u128().expect("128 bits");
    let width = ((&ld.hi - &l.lo) >> drop).to_u128().expect("window width below 1") + 1;
    let n_max = (cutoff as f64 / 1.584_962_500_721_156) as u64 + 2;
    const BLOCK: u64 = 1 << 22;
    let blocks: Vec<u64> = (0..n_max.div_ceil(BLOCK)).collect();
    let total = AtomicUsize::new(0);
    let mut out: Vec<u64> = blocks
        .par_iter()
        .flat_map_iter(|&b| {
            let lo = (b * BLOCK).max(1);
            let hi = ((b + 1) * BLOCK).min(n_max + 1);
            let mut s = step.wrapping_mul(lo as u128);
            let mut hits = Vec::new();
            for n in lo..hi {
                // the truncated sum lags the true one by less than n units
                let slack = (n as u128).saturating_mul(width).saturating_add(n as u128 + 1);
                if s.checked_add(slack).is_none() {
                    hits.push(n);
                    if hits.len() % 4096 == 0 && total.load(atomic::Ordering::Relaxed) + hits.len() > max_hits {
                        break;
                    }
                }
                s = s.wrapping_add(step);
            }
            total.fetch_add(hits.len(), atomic::Ordering::Relaxed);
            hits
        })
        .collect();
    if total.into_inner() > max_hits {
        return None;
    }
    out.sort_unstable();
    Some(out)
}

enum Window {
    /// Period `k`; flag set when exact arithmetic was needed.
    Feasible(u64, bool),
    Empty(bool),
}

fn certify_window(n: u64, l: &FixedInterval, ld: &FixedInterval, d: &BigUint) -> Window {
    let f = l.frac_bits as usize;
    let nb = BigInt::from(n);
    let nl = l.scale(&nb);
    let lo_floor = &nl.lo >> f;
    let hi_floor = &nl.hi >> f;
    let k = if lo_floor == hi_floor {
        lo_floor + 1u32
    } else {
        // floor(n log2 3) by exact power comparison: 2^j < 3^n < 2^(j+1)
        BigInt::from(crate::bigmath::pow_u(3, n).bits())
    };
    let k_u = k.to_u64().expect("period fits u64");
    let scaled_k = &k << f;
    let nld = ld.scale(&nb);
    if nld.lo > scaled_k {
        Window::Feasible(k_u, lo_floor_differs(&nl, f))
    } else if nld.hi < scaled_k {
        Window::Empty(lo_floor_differs(&nl, f))
    } else {
        // k < n log2(3 + 1/D)  <=>  2^k D^n < (3D + 1)^n
        let lhs = (BigUint::one() << k_u as usize) * num_traits::pow(d.clone(), n as usize);
        let rhs = num_traits::pow(d * 3u32 + 1u32, n as usize);
        if lhs < rhs {
            Window::Feasible(k_u, true)
        } else {
            Window::Empty(true)
        }
    }
}

fn lo_floor_differs(nl: &FixedInterval, f: usize) -> bool {
    (&nl.lo >> f) != (&nl.hi >> f)
}

const LIMBS: usize = 6;
const FRAC_LIMBS: usize = 4;

/// Unsigned fixed point `value * 2^256` in little-endian 64-bit limbs.
type Fx = [u64; LIMBS];

fn fx_triple_plus_one_half(y: &mut Fx, round_up: bool) -> bool {
    // y <- (3y + 1) / 2
    let mut carry = 0u128;
    for limb in y.iter_mut() {
        let v = *limb as u128 * 3 + carry;
        *limb = v as u64;
        carry = v >> 64;
    }
    if carry != 0 {
        return false;
    }
    let mut c = 1u128;
    for limb in y.iter_mut().skip(FRAC_LIMBS) {
        let v = *limb as u128 + c;
        *limb = v as u64;
        c = v >> 64;
        if c == 0 {
            break;
        }
    }
    c == 0 && fx_half(y, round_up)
}

fn fx_half(y: &mut Fx, round_up: bool) -> bool {
    let odd = y[0] & 1 == 1;
    for i in 0..LIMBS {
        let hi_bit = if i + 1 < LIMBS { y[i + 1] << 63 } else { 0 };
        y[i] = (y[i] >> 1) | hi_bit;
    }
    if odd && round_up {
        for limb in y.iter_mut() {
            let (v, o) = limb.overflowing_add(1);
            *limb = v;
            if !o {
                break;
            }
        }
    }
    true
}

fn fx_to_big(y: &Fx) -> BigUint {
    let mut digits = Vec::with_capacity(LIMBS * 2);
    for &l in y {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

/// Enclosure `[lo, hi] * 2^e` of `3^n`, each kept to `prec` bits.
fn pow3_enclosure(n: u64, prec: u64) -> (BigUint, BigUint, i64) {
    fn trim(x: BigUint, e: i64, prec: u64, up: bool) -> (BigUint, i64) {
        let b = x.bits();
        if b <= prec {
            return (x, e);
        }
        let s = b - prec;
        let mut t = &x >> s;
        if up && (t.clone() << s) != x {
            t += 1u32;
        }
        (t, e + s as i64)
    }
    let (mut lo, mut hi, mut e_lo, mut e_hi) = (BigUint::one(), BigUint::one(), 0i64, 0i64);
    for bit in (0..64 - n.leading_zeros()).rev() {
        let (a, ea) = trim(&lo * &lo, 2 * e_lo, prec, false);
        let (b, eb) = trim(&hi * &hi, 2 * e_hi, prec, true);
        (lo, e_lo, hi, e_hi) = (a, ea, b, eb);
        if n >> bit & 1 == 1 {
            let (a, ea) = trim(lo * 3u32, e_lo, prec, false);
            let (b, eb) = trim(hi * 3u32, e_hi, prec, true);
            (lo, e_lo, hi, e_hi) = (a, ea, b, eb);
        }
    }
    // bring both to a common exponent (rounding outward)
    let e = e_lo.max(e_hi);
    let lo = lo >> (e - e_lo) as usize;
    let hi_shift = (e - e_hi) as usize;
    let hi = if hi_shift > 0 { (hi >> hi_shift) + 1u32 } else { hi };
    (lo, hi, e)
}

/// `x / 2^s` for signed `s`, rounded down or up.
fn shift_round(x: &BigUint, s: i64, up: bool) -> BigUint {
    if s >= 0 {
        x << s as usize
    } else {
        let r = x >> (-s) as usize;
        if up && (r.clone() << (-s) as usize) != *x {
            r + 1u32
        } else {
            r
        }
    }
}

/// Sign of `k - n log2 3`.
fn k_vs_n_log2_3(k: u64, n: u64) -> Ordering {
    let l = log2_3(DEFAULT_FRAC_BITS).scale(&BigInt::from(n));
    let kk = BigInt::from(k) << DEFAULT_FRAC_BITS as usize;
    if kk > l.hi {
        Ordering::Greater
    } else if kk < l.lo {
        Ordering::Less
    } else {
        crate::bigmath::fixed::cmp_pow2_pow3(k, n)
    }
}

/// Minimal element of the cycle whose parity word puts the `j`-th odd step at
/// `floor(j k / n)`, with a certified comparison against `d`.
pub fn balanced_min_element(n: u64, k: u64, d: &BigUint) -> Result<MinElementCheck> {
    if n == 0 || k <= n {
        return Err(Error::usage("balanced word needs 0 < n < k"));
    }
    if k_vs_n_log2_3(k, n) != Ordering::Greater {
        return Err(Error::usage("need 2^k > 3^n"));
    }
    // c = replay of the word from 0, enclosed in [c_lo, c_hi] / 2^256
    let mut lo: Fx = [0; LIMBS];
    let mut hi: Fx = [0; LIMBS];
    let mut j = 0u64;
    let mut next_one = 0u64;
    for i in 0..k {
        let ok = if i == next_one {
            j += 1;
            next_one = if j < n { ((j as u128 * k as u128) / n as u128) as u64 } else { u64::MAX };
            fx_triple_plus_one_half(&mut lo, false) && fx_triple_plus_one_half(&mut hi, true)
        } else {
            fx_half(&mut lo, false) && fx_half(&mut hi, true)
        };
        if !ok {
            return Err(Error::usage("cycle element exceeds the fixed-point range"));
        }
    }
    let c_lo = fx_to_big(&lo);
    let c_hi = fx_to_big(&hi);
    // 1 - 3^n / 2^k enclosed at F fractional bits
    const F: i64 = 384;
    let (p_lo, p_hi, e) = pow3_enclosure(n, 448);
    let one = BigUint::one() << F as usize;
    let r_lo = shift_round(&p_lo, e - k as i64 + F, false);
    let r_hi = shift_round(&p_hi, e - k as i64 + F, true);
    if r_hi >= one {
        return Ok(MinElementCheck {
            n,
            k,
            min_element: "undetermined".into(),
            exceeds_d: None,
        });
    }
    let om_lo = &one - &r_hi;
    let om_hi = &one - &r_lo;
    // x0 = c / (1 - 3^n/2^k); compare c * 2^F with d * om * 2^256
    let lhs_lo = &c_lo << F as usize;
    let lhs_hi = &c_hi << F as usize;
    let exceeds = if lhs_lo > d * &om_hi << 256usize {
        Some(true)
    } else if lhs_hi < d * &om_lo << 256usize {
        Some(false)
    } else {
        None
    };
    let scale = num_traits::pow(BigUint::from(10u32), 6);
    let x_lo = (lhs_lo * &scale).div_floor(&(om_hi << 256usize));
    let s = format!("{x_lo:0>7}");
    let (ip, fp) = s.split_at(s.len() - 6);
    Ok(MinElementCheck {
        n,
        k,
        min_element: format!("{ip}.{fp}"),
        exceeds_d: exceeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::cycle_value;
    use crate::parity::ParityVector;

    #[test]
    fn fixed_decimal_format() {
        assert_eq!(fixed_decimal(&BigInt::from(3), 1, 3), "1.500");
        assert_eq!(fixed_decimal(&BigInt::from(1), 2, 3), "0.250");
    }

    #[test]
    fn pow3_enclosure_brackets() {
        for n in [1u64, 5, 40, 41, 1000] {
            let exact = crate::bigmath::pow_u(3, n);
            let (lo, hi, e) = pow3_enclosure(n, 64);
            let lo_v = shift_round(&lo, e, false);
            let hi_v = shift_round(&hi, e, true);
            assert!(lo_v <= exact && exact <= hi_v, "n={n}");
        }
    }

    #[test]
    fn balanced_element_matches_exact_value() {
        for &(n, k) in &[(1u64, 2u64), (2, 4), (5, 8), (7, 12), (41, 65), (306, 485)] {
            let ones: Vec<usize> = (0..n).map(|j| (j * k / n) as usize).collect();
            let v = cycle_value(&ParityVector::from_ones(k as usize, &ones)).unwrap().value;
            let fl = v.floor().to_integer();
            let below = BigUint::try_from(fl.clone()).unwrap();
            let above = below.clone() + 1u32;
            let c = balanced_min_element(n, k, &below.max(BigUint::from(2u32))).unwrap();
            if fl >= BigInt::from(2) {
                assert_eq!(c.exceeds_d, Some(true), "n={n} k={k} v={v}");
            }
            let c = balanced_min_element(n, k, &above).unwrap();
            assert_eq!(c.exceeds_d, Some(false), "n={n} k={k} v={v}");
        }
    }

    #[test]
    fn small_d_bound() {
        let r = cycle_length_lower_bound(
            &BigUint::from(100u32),
            &BoundOptions {
                cutoff: 10_000,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.feasible_count > 0);
        for (&n, &p) in r.feasible_odd_terms.iter().zip(&r.feasible_periods) {
            // p = 1 + floor(n log2 3) and 2^p D^n < (3D+1)^n
            assert_eq!(p, crate::bigmath::pow_u(3, n).bits());
            let d = BigUint::from(100u32);
            assert!((BigUint::one() << p as usize) * num_traits::pow(d.clone(), n as usize) < num_traits::pow(d * 3u32 + 1u32, n as usize));
        }
    }

    #[test]
    fn monotone_in_d() {
        let opts = BoundOptions {
            cutoff: 200_000,
            ..Default::default()
        };
        let mut last = 0;
        for d in [2u32, 10, 100, 1000, 100_000] {
            let r = cycle_length_lower_bound(&BigUint::from(d), &opts).unwrap();
            let p = r.min_period.unwrap();
            assert!(p >= last);
            last = p;
        }
    }
}
