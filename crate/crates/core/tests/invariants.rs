mod common;

use collatz_core::bigmath::BigUint;
use collatz_core::maps::{builtin, Limits, Num};
use collatz_core::stats::stats_record;
use collatz_core::twoadic::parity_prefix;
use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;

fn ok(c: Check) {
    if let Err(w) = c {
        panic!("{w}");
    }
}

#[test]
fn kuttler_exhaustive() {
    ok(kuttler(20, 1000));
}

#[test]
fn cadogan_exhaustive() {
    ok(cadogan(10_000));
}

#[test]
fn height_is_sigma_inf_plus_odd_steps() {
    ok(height_identity(20_000));
}

#[test]
fn parity_prefix_depends_on_residue() {
    ok(parity_prefix_congruence(16, 100_000));
}

#[test]
fn cycle_values_replay() {
    ok(bohm_sontacchi(16));
}

#[test]
fn permutations_are_bijective() {
    ok(permutations(2_000, 20_000));
}

#[test]
fn fractran_is_deterministic() {
    ok(fractran_determinism(500));
}

#[test]
fn transition_matrices_are_stochastic() {
    ok(row_stochastic(30));
}

#[test]
fn bringer_conditions() {
    ok(bringer(10_000));
}

fn t_big(x: &BigInt) -> BigInt {
    if x.bit(0) {
        (x * 3 + 1) >> 1
    } else {
        x >> 1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kuttler_large(k in 1u32..200, n in 1u64..u64::MAX) {
        let n = BigInt::from(n);
        let mut x = (&n << k) - 1;
        for _ in 0..k {
            x = t_big(&x);
        }
        prop_assert_eq!(x, BigInt::from(3).pow(k) * n - 1);
    }

    #[test]
    fn cadogan_signed(x in -(1i128 << 60)..(1i128 << 60)) {
        let x = 2 * x + 1;
        prop_assert_eq!(c(c(c(4 * x + 1))), c(x));
    }

    #[test]
    fn height_identity_random(n in 1u64..u64::MAX) {
        let r = stats_record(&BigUint::from(n), &Limits::default());
        prop_assert_eq!(r.height.unwrap(), r.sigma_inf.unwrap() + r.d_odd.unwrap());
        prop_assert_eq!(r.parity.len() as u64, r.sigma_inf.unwrap());
    }

    #[test]
    fn parity_prefix_random(k in 1u32..=32, n in -(1i128 << 80)..(1i128 << 80)) {
        let r = n.rem_euclid(1i128 << k);
        prop_assert_eq!(parity_prefix(n, k).unwrap(), parity_prefix(r, k).unwrap());
    }

    #[test]
    fn t_agrees_with_builtin(x in -(1i128 << 100)..(1i128 << 100)) {
        prop_assert_eq!(builtin::t().step_i(x).unwrap(), Num::Small(t(x)));
    }
}
