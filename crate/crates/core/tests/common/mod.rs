//! Exhaustive property checks shared by the invariant suite and the acceptance harness.
//! Each returns a one-line summary on success and a witness on failure.

#![allow(dead_code)]

use collatz_core::aux::queneau_admissible;
use collatz_core::bigmath::{BigInt, BigUint};
use collatz_core::cycles::{cycle_value, lyndon_words, replay};
use collatz_core::fractran::{fractran_trace, FractranProgram};
use collatz_core::maps::{builtin, Limits, MapSpec, Num};
use collatz_core::markov::transition_matrix;
use collatz_core::stats::stats_record;
use collatz_core::twoadic::parity_prefix;
use collatz_core::ParityVector;
use num_traits::{One, Signed};

pub type Check = Result<String, String>;

pub fn t(x: i128) -> i128 {
    if x & 1 == 1 {
        (3 * x + 1) / 2
    } else {
        x / 2
    }
}

pub fn c(x: i128) -> i128 {
    if x & 1 == 1 {
        3 * x + 1
    } else {
        x / 2
    }
}

/// `T^k(2^k n - 1) = 3^k n - 1`.
pub fn kuttler(k_max: u32, n_max: i128) -> Check {
    for k in 1..=k_max {
        for n in 1..=n_max {
            let mut x = (n << k) - 1;
            for _ in 0..k {
                x = t(x);
            }
            if x != 3i128.pow(k) * n - 1 {
                return Err(format!("k = {k}, n = {n}"));
            }
        }
    }
    Ok(format!("{} cases", k_max as i128 * n_max))
}

/// `C^3(4x + 1) = C(x)` for odd `x`.
pub fn cadogan(x_max: i128) -> Check {
    for x in (1..=x_max).step_by(2) {
        if c(c(c(4 * x + 1))) != c(x) {
            return Err(format!("x = {x}"));
        }
    }
    Ok(format!("{} odd x", (x_max + 1) / 2))
}

/// `h = sigma_inf + d` on every record, with `h` recomputed by iterating `C`.
pub fn height_identity(n_max: u64) -> Check {
    let lim = Limits::default();
    for n in 1..=n_max {
        let r = stats_record(&BigUint::from(n), &lim);
        let (Some(s), Some(d), Some(h)) = (r.sigma_inf, r.d_odd, r.height) else {
            return Err(format!("n = {n} unresolved"));
        };
        let mut x = n as i128;
        let mut steps = 0u64;
        while x != 1 {
            x = c(x);
            steps += 1;
        }
        if h != s + d || h != steps {
            return Err(format!("n = {n}: h = {h}, sigma_inf = {s}, d = {d}, C-steps = {steps}"));
        }
    }
    Ok(format!("n <= {n_max}"))
}

/// The first `k` parities of `n` depend only on `n mod 2^k`.
pub fn parity_prefix_congruence(k_max: u32, n_max: i128) -> Check {
    for k in 1..=k_max {
        let m = 1i128 << k;
        let reps: Vec<ParityVector> = (0..m.min(n_max + 1)).map(|r| parity_prefix(r, k).unwrap()).collect();
        for n in 1..=n_max {
            let r = (n % m) as usize;
            if r < reps.len() && parity_prefix(n, k).unwrap() != reps[r] {
                return Err(format!("k = {k}, n = {n}"));
            }
        }
    }
    Ok(format!("k <= {k_max}, n <= {n_max}"))
}

/// Every integer cycle value replays to itself and satisfies `|x| < 3^n`.
pub fn bohm_sontacchi(n_max: usize) -> Check {
    let mut integers = 0;
    for n in 1..=n_max {
        let bound = BigInt::from(3).pow(n as u32);
        for w in lyndon_words(n) {
            let word = ParityVector::from_bits((0..n).map(|i| (w >> i) & 1 == 1));
            let v = cycle_value(&word).map_err(|e| e.to_string())?;
            if !v.integer {
                continue;
            }
            integers += 1;
            if v.value.numer().abs() >= bound {
                return Err(format!("word {word}: |{}| >= 3^{n}", v.value));
            }
            if replay(&word, &v.value, 1) != Some(v.value.clone()) {
                return Err(format!("word {word} does not replay"));
            }
        }
    }
    Ok(format!("{integers} integer cycle values, words up to length {n_max}"))
}

fn inverse_klamkin(y: i128) -> i128 {
    match y.rem_euclid(4) {
        0 | 2 => 3 * (y / 2),
        3 => 3 * ((y + 1) / 4) - 1,
        _ => 3 * ((y + 3) / 4) - 2,
    }
}

fn inverse_atkin(y: i128) -> i128 {
    match y.rem_euclid(4) {
        0 | 2 => 3 * (y / 2) + 1,
        3 => 3 * ((y - 3) / 4),
        _ => 3 * ((y - 1) / 4) + 2,
    }
}

fn two_sided(map: &MapSpec, inv: fn(i128) -> i128, lo: i128, hi: i128) -> Result<(), String> {
    for x in lo..=hi {
        let y = map.step_i(x).map_err(|e| e.to_string())?.as_small().expect("small");
        if inv(y) != x {
            return Err(format!("{}: inverse fails at x = {x}", map.name));
        }
        let back = map.step_i(inv(x)).map_err(|e| e.to_string())?;
        if back != Num::Small(x) {
            return Err(format!("{}: not onto at y = {x}", map.name));
        }
    }
    Ok(())
}

/// Spiral maps are permutations of `{1..n}`; the two original-Collatz permutations are
/// bijections of `Z` (checked on a window through explicit inverses).
pub fn permutations(n_max: u64, window: i128) -> Check {
    for n in 1..=n_max {
        let mut hit = vec![false; n as usize + 1];
        let map = builtin::queneau(n).unwrap();
        for x in 1..=n as i128 {
            let y = map.step_i(x).map_err(|e| e.to_string())?.as_small().unwrap();
            if y < 1 || y > n as i128 || std::mem::replace(&mut hit[y as usize], true) {
                return Err(format!("spiral n = {n} at x = {x}"));
            }
        }
    }
    two_sided(&builtin::collatz_permutation(), inverse_klamkin, -window, window)?;
    two_sided(&builtin::atkin_permutation(), inverse_atkin, -window, window)?;
    Ok(format!("spiral n <= {n_max}; Klamkin and Atkin on [-{window}, {window}]"))
}

/// Identical traces on repeated runs, with the register view matching the value.
pub fn fractran_determinism(steps: u64) -> Check {
    let toy: FractranProgram = "21/10 5/7 26/33 11/13 2/11 11/5 5/1".parse().map_err(|e: collatz_core::Error| e.to_string())?;
    for (prog, m0) in [(FractranProgram::primegame(), 2u32), (toy, 2u32.pow(5))] {
        let a = fractran_trace(&prog, &BigUint::from(m0), steps).map_err(|e| e.to_string())?;
        let b = fractran_trace(&prog, &BigUint::from(m0), steps).map_err(|e| e.to_string())?;
        if a != b {
            return Err("traces differ between runs".into());
        }
        for row in &a {
            let mut v = BigUint::one();
            for (p, e) in prog.primes.iter().zip(&row.registers) {
                v *= num_traits::pow(BigUint::from(*p), *e as usize);
            }
            // the cofactor is 1 for these starts
            if v != row.value {
                return Err(format!("register view differs at step {}", row.step));
            }
        }
    }
    Ok(format!("{steps} steps, two programs"))
}

/// Transition matrices have exact unit row sums.
pub fn row_stochastic(m_max: u64) -> Check {
    let maps = [
        builtin::t(),
        builtin::venturini(),
        builtin::feix3(),
        builtin::qx_plus_1(5).unwrap(),
        builtin::collatz_permutation(),
        builtin::wiggin(3).unwrap(),
    ];
    let mut n = 0;
    for map in &maps {
        for m in 2..=m_max {
            let q = transition_matrix(map, m).map_err(|e| e.to_string())?;
            if !q.row_sums_are_one() {
                return Err(format!("{} mod {m}", map.name));
            }
            n += 1;
        }
    }
    Ok(format!("{n} matrices"))
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn two_is_primitive_root(p: u64) -> bool {
    let mut x = 1u64;
    for k in 1..p - 1 {
        x = x * 2 % p;
        if x == 1 {
            return k == p - 1;
        }
    }
    x * 2 % p == 1
}

/// Admissible `n` has `2n+1` prime; 2 primitive mod `2n+1` makes `n` admissible.
pub fn bringer(n_max: u64) -> Check {
    let mut admissible = 0;
    for n in 1..=n_max {
        let p = 2 * n + 1;
        let adm = queneau_admissible(n);
        admissible += adm as u64;
        if adm && !is_prime(p) {
            return Err(format!("necessity fails at n = {n}"));
        }
        if is_prime(p) && two_is_primitive_root(p) && !adm {
            return Err(format!("sufficiency fails at n = {n}"));
        }
    }
    Ok(format!("n <= {n_max}, {admissible} admissible"))
}
