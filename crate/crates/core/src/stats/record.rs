use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::maps::Limits;
use crate::parity::ParityVector;

/// `T(x)` on `u128`, or `None` on overflow.
#[inline]
pub fn t_step_u128(x: u128) -> Option<u128> {
    if x & 1 == 0 {
        Some(x >> 1)
    } else {
        // (3x+1)/2 = x + (x+1)/2
        x.checked_add((x >> 1) + 1)
    }
}

#[inline]
pub fn t_step_u64(x: u64) -> Option<u64> {
    if x & 1 == 0 {
        Some(x >> 1)
    } else {
        x.checked_add((x >> 1) + 1)
    }
}

pub fn t_step_big(x: &mut BigUint) {
    if x.bit(0) {
        let y = &*x >> 1u32;
        *x += y + 1u32;
    } else {
        *x >>= 1u32;
    }
}

/// Positive integer with a 128-bit fast path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Val {
    Small(u128),
    Big(BigUint),
}

impl Val {
    fn new(n: &BigUint) -> Val {
        match n.to_u128() {
            Some(v) => Val::Small(v),
            None => Val::Big(n.clone()),
        }
    }

    fn step(&mut self) {
        match self {
            Val::Small(v) => match t_step_u128(*v) {
                Some(w) => *v = w,
                None => {
                    let mut b = BigUint::from(*v);
                    t_step_big(&mut b);
                    *self = Val::Big(b);
                }
            },
            Val::Big(b) => {
                t_step_big(b);
                if let Some(v) = b.to_u128() {
                    *self = Val::Small(v);
                }
            }
        }
    }

    fn is_odd(&self) -> bool {
        match self {
            Val::Small(v) => v & 1 == 1,
            Val::Big(b) => b.bit(0),
        }
    }

    fn is_one(&self) -> bool {
        matches!(self, Val::Small(1))
    }

    fn bits(&self) -> u64 {
        match self {
            Val::Small(v) => 128 - v.leading_zeros() as u64,
            Val::Big(b) => b.bits(),
        }
    }

    fn to_big(&self) -> BigUint {
        match self {
            Val::Small(v) => BigUint::from(*v),
            Val::Big(b) => b.clone(),
        }
    }
}

/// Orbit statistics of `n` under `T`. Missing counts mean the limits were hit first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRecord {
    #[serde(with = "crate::report::decimal")]
    pub n: BigUint,
    /// Least `k >= 1` with `T^k(n) < n`.
    pub sigma: Option<u64>,
    /// Least `k` with `T^k(n) = 1`.
    pub sigma_inf: Option<u64>,
    /// Odd iterates among `n, T(n), ..` before 1.
    pub d_odd: Option<u64>,
    /// Steps of `C` to reach 1, equal to `sigma_inf + d_odd`.
    pub height: Option<u64>,
    /// `sigma_inf / ln n`.
    pub gamma: Option<f64>,
    /// Largest value in the forward orbit, including `n` and the cycle `{1, 2}`.
    #[serde(with = "crate::report::decimal")]
    pub excursion: BigUint,
    /// Parity of the iterates before 1 (or before the limit).
    pub parity: ParityVector,
    /// Which limit stopped the iteration, if any.
    pub unresolved: Option<String>,
}

impl StatsRecord {
    /// Gamma to 6 significant digits.
    pub fn gamma_display(&self) -> String {
        match self.gamma {
            Some(g) => {
                let int_digits = (g.abs().log10().floor() as i32 + 1).max(1);
                format!("{g:.*}", (6 - int_digits).max(0) as usize)
            }
            None => "unresolved".into(),
        }
    }
}

/// Natural log of a positive big integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Stopping time, total stopping time, height, gamma and excursion of `n >= 1`.
pub fn stats_record(n: &BigUint, limits: &Limits) -> StatsRecord {
    assert!(*n >= BigUint::one(), "stats_record needs n >= 1");
    let start = Val::new(n);
    let mut x = start.clone();
    let mut max = start.clone();
    let mut parity = ParityVector::new();
    let mut sigma = None;
    let mut d_odd = 0u64;
    let mut k = 0u64;
    let mut unresolved = None;
    while !x.is_one() {
        if k == limits.step_limit {
            unresolved = Some("step_limit".to_string());
            break;
        }
        let odd = x.is_odd();
        parity.push(odd);
        d_odd += odd as u64;
        x.step();
        k += 1;
        if x.bits() > limits.magnitude_bits {
            unresolved = Some("magnitude_limit".to_string());
            break;
        }
        if x > max {
            max = x.clone();
        }
        if sigma.is_none() && x < start {
            sigma = Some(k);
        }
    }
    let resolved = unresolved.is_none();
    if resolved && sigma.is_none() && !start.is_one() {
        // unreachable for n >= 2: reaching 1 means dropping below n
        sigma = Some(k);
    }
    let mut excursion = max.to_big();
    if resolved && excursion < BigUint::from(2u32) {
        excursion = BigUint::from(2u32);
    }
    let sigma_inf = resolved.then_some(k);
    let ln = ln_big(n);
    StatsRecord {
        n: n.clone(),
        sigma,
        sigma_inf,
        d_odd: resolved.then_some(d_odd),
        height: resolved.then_some(k + d_odd),
        gamma: sigma_inf.filter(|_| ln > 0.0).map(|s| s as f64 / ln),
        excursion,
        parity,
        unresolved,
    }
}

/// `(sigma_inf, height, excursion)` of a small `n >= 1`, or `None` on `u64` overflow
/// or when the step limit trips.
#[inline]
pub fn orbit_u64(n: u64, step_limit: u64) -> Option<(u64, u64, u64)> {
    let mut x = n;
    let mut k = 0u64;
    let mut odd = 0u64;
    let mut max = n.max(2);
    while x != 1 {
        if k == step_limit {
            return None;
        }
        odd += x & 1;
        x = t_step_u64(x)?;
        k += 1;
        max = max.max(x);
    }
    Some((k, k + odd, max))
}

/// `(sigma_inf, height)` of any `n >= 1`.
pub fn sigma_inf_height(n: &BigUint, limits: &Limits) -> Option<(u64, u64)> {
    if let Some(v) = n.to_u64() {
        if let Some((s, h, _)) = orbit_u64(v, limits.step_limit) {
            return Some((s, h));
        }
    }
    let mut x = n.clone();
    let mut k = 0u64;
    let mut odd = 0u64;
    while !x.is_one() {
        if k == limits.step_limit || x.bits() > limits.magnitude_bits {
            return None;
        }
        // Strip a run of zeros at once.
        let tz = x.trailing_zeros().expect("x > 0");
        if tz > 0 {
            x >>= tz;
            k += tz;
            continue;
        }
        odd += 1;
        t_step_big(&mut x);
        k += 1;
    }
    Some((k, k + odd))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u64) -> StatsRecord {
        stats_record(&BigUint::from(n), &Limits::default())
    }

    #[test]
    fn twenty_seven() {
        let r = rec(27);
        assert_eq!(r.sigma, Some(59));
        assert_eq!(r.sigma_inf, Some(70));
        assert_eq!(r.height, Some(111));
        assert_eq!(r.excursion, BigUint::from(4616u32));
        assert!((r.gamma.unwrap() - 21.238915).abs() < 1e-5);
        assert_eq!(r.gamma_display(), "21.2389");
    }

    #[test]
    fn two_and_one() {
        let r = rec(2);
        assert_eq!((r.sigma, r.sigma_inf, r.height), (Some(1), Some(1), Some(1)));
        assert!((r.gamma.unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.excursion, BigUint::from(2u32));
        let r = rec(1);
        assert_eq!((r.sigma, r.sigma_inf), (None, Some(0)));
        assert_eq!(r.gamma, None);
    }

    #[test]
    fn fast_paths_agree() {
        for n in 1..2000u64 {
            let r = rec(n);
            let (s, h, t) = orbit_u64(n, 100_000).unwrap();
            assert_eq!(r.sigma_inf, Some(s));
            assert_eq!(r.height, Some(h));
            assert_eq!(r.excursion, BigUint::from(t));
            assert_eq!(sigma_inf_height(&BigUint::from(n), &Limits::default()), Some((s, h)));
        }
    }

    #[test]
    fn limits_reported() {
        let r = stats_record(
            &BigUint::from(27u32),
            &Limits {
                step_limit: 10,
                ..Default::default()
            },
        );
        assert_eq!(r.unresolved.as_deref(), Some("step_limit"));
        assert_eq!(r.sigma_inf, None);
        assert_eq!(r.parity.len(), 10);
    }
}
