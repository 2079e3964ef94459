//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p collatz-core --test acceptance` runs the default tier; add `-- --slow`
//! (or set `COLLATZ_SLOW=1`) for the long equal-height run.

mod common;

use std::time::{Duration, Instant};

use collatz_core::aux::queneau_admissible_up_to;
use collatz_core::bigmath::{BigInt, BigUint};
use collatz_core::cycles::{circuit_shape, circuit_solutions, cycle_length_lower_bound, BoundOptions};
use collatz_core::kappa::verify_cstc;
use collatz_core::maps::{builtin, find_cycles, reach_census, Limits, Num};
use collatz_core::markov::{analyze, transition_matrix};
use collatz_core::stats::{equal_height_tuples, excursion_records, stats_record, verify_range, VerifyMode};
use collatz_core::stochastic::{alpha0, compute_c0, rw_sample};
use collatz_core::trees::{tree_counts, TreeMode};
use collatz_core::twoadic::{conjugacy_check, perm_analysis};
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_TOL: f64 = 1e-3;
const VENTURINI_TOL: f64 = 1e-4;
const C0_TOL: f64 = 0.01;
const RW_SIGMAS: f64 = 3.0;
const TREE_BRACKET: (f64, f64) = (1.29, 1.37);
const TREE_MEAN_TOL: f64 = 0.15;
const SEED: u64 = 1;

/// Criteria expected to fail; see the project notes for the analysis.
const KNOWN_FAILURES: &[u32] = &[8];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64, what: &str) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("{what} took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64()),
    )
}

fn c1() -> Outcome {
    let t = Instant::now();
    let r = verify_range(100_000_000, VerifyMode::Sieve { k: 16 }, 100_000).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ensure(r.verified, "verify_range did not verify")?;
    within(dt, 600, "verify_range")?;
    Ok(format!("n <= 1e8 verified in {:.2}s, {} iterated", dt.as_secs_f64(), r.iterated))
}

fn c2() -> Outcome {
    let n: BigUint = "37664971860959140595765286740059".parse().unwrap();
    let r = stats_record(&n, &Limits::default());
    let (s, g) = (r.sigma_inf.ok_or("unresolved")?, r.gamma.ok_or("no gamma")?);
    ensure(s == 2565, format!("sigma_inf = {s}"))?;
    ensure((g - 35.2789).abs() <= GAMMA_TOL, format!("gamma = {g}"))?;
    Ok(format!("sigma_inf = {s}, gamma = {g:.4}"))
}

fn c3() -> Outcome {
    let t = Instant::now();
    let r = verify_cstc(2593).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ensure(r.verified && r.counterexample.is_none(), format!("counterexample {:?}", r.counterexample))?;
    within(dt, 60, "verify_cstc")?;
    Ok(format!("no counterexample, checked to {}, {:.2}s", r.checked_up_to, dt.as_secs_f64()))
}

/// `p = 301994 A + 17087915 B + 85137581 C` with `B >= 1`, `A C = 0`.
fn decomposes(p: u64) -> bool {
    const A: u64 = 301_994;
    const B: u64 = 17_087_915;
    const C: u64 = 85_137_581;
    (0..=p / C).any(|c| {
        let rest = p - c * C;
        if c > 0 {
            rest >= B && rest % B == 0
        } else {
            (1..=rest / B).any(|b| (rest - b * B) % A == 0)
        }
    })
}

fn c4() -> Outcome {
    let t = Instant::now();
    let opts = BoundOptions {
        list_limit: usize::MAX,
        ..BoundOptions::default()
    };
    let r = cycle_length_lower_bound(&(BigUint::one() << 40), &opts).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ensure(r.min_period == Some(17_087_915), format!("min_period = {:?}", r.min_period))?;
    ensure(r.feasible_periods.len() == r.feasible_count, "feasible list truncated")?;
    if let Some(p) = r.feasible_periods.iter().find(|&&p| !decomposes(p)) {
        return Err(format!("period {p} does not decompose"));
    }
    within(dt, 60, "cycle bound")?;
    Ok(format!(
        "min_period 17087915, {} feasible periods <= 1e9 decompose, {:.2}s",
        r.feasible_count,
        dt.as_secs_f64()
    ))
}

fn c5() -> Outcome {
    let r = cycle_length_lower_bound(&BigUint::from(212_366_032_807_211u64), &BoundOptions::default())
        .map_err(|e| e.to_string())?;
    ensure(r.min_period == Some(102_225_496), format!("min_period = {:?}", r.min_period))?;
    Ok("min_period 102225496".into())
}

fn c6() -> Outcome {
    let r = find_cycles(&builtin::t(), -100_000, 100_000, &Limits::default()).map_err(|e| e.to_string())?;
    ensure(r.cycles.len() == 5, format!("{} cycles", r.cycles.len()))?;
    let t = builtin::t();
    for c in &r.cycles {
        let n = c.elements.len();
        for i in 0..n {
            let next = t.step(&c.elements[i]).map_err(|e| e.to_string())?;
            ensure(next == c.elements[(i + 1) % n], format!("cycle at {} does not replay", c.min))?;
        }
    }
    let mins: Vec<String> = r.cycles.iter().map(|c| c.min.to_string()).collect();
    Ok(format!("5 cycles, minima {}", mins.join(", ")))
}

fn c7() -> Outcome {
    for n in 6..=20 {
        let r = perm_analysis(n).map_err(|e| e.to_string())?;
        ensure(r.order == BigUint::one() << (n - 4), format!("n = {n}: order {}", r.order))?;
    }
    for n in 4..=16 {
        conjugacy_check(n).map_err(|e| e.to_string())?;
    }
    Ok("order 2^(n-4) for 6 <= n <= 20; conjugacy exhaustive for n <= 16".into())
}

fn c8() -> Outcome {
    const K: u32 = 30;
    const SAMPLE: usize = 100;
    const ROOT_MAX: i128 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let expected = (4.0f64 / 3.0).powi(K as i32);
    let leaves = |a: i128| tree_counts(a, K, TreeMode::Counts).map(|t| t.leaves()).map_err(|e| e.to_string());

    let mut units = Vec::with_capacity(SAMPLE);
    while units.len() < SAMPLE {
        let a = rng.gen_range(1..=ROOT_MAX);
        if a % 3 != 0 {
            units.push(a);
        }
    }
    let mut roots: Vec<(i128, f64)> = Vec::with_capacity(SAMPLE);
    for &a in &units {
        roots.push((a, (leaves(a)? as f64).powf(1.0 / K as f64)));
    }
    let outside: Vec<&(i128, f64)> = roots
        .iter()
        .filter(|(_, g)| *g < TREE_BRACKET.0 || *g > TREE_BRACKET.1)
        .collect();
    let lo = roots.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hi = roots.iter().map(|r| r.1).fold(0.0, f64::max);

    // the leaf mean is taken over uniformly sampled roots of every residue
    let mut total = 0.0;
    for _ in 0..SAMPLE {
        total += leaves(rng.gen_range(1..=ROOT_MAX))? as f64;
    }
    let ratio = total / SAMPLE as f64 / expected;
    let mean_ok = (ratio - 1.0).abs() <= TREE_MEAN_TOL;

    let detail = format!(
        "growth in [{lo:.4}, {hi:.4}], {} of {SAMPLE} outside [{}, {}]; mean/(4/3)^{K} = {ratio:.3}",
        outside.len(),
        TREE_BRACKET.0,
        TREE_BRACKET.1
    );
    if outside.is_empty() && mean_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9() -> Outcome {
    let r = analyze(&builtin::venturini(), 10).map_err(|e| e.to_string())?;
    let c = r
        .classes
        .iter()
        .find(|c| c.members == [0, 5])
        .ok_or("no closed class {0, 5}")?;
    let third = collatz_core::bigmath::rat(1, 3);
    let two_thirds = collatz_core::bigmath::rat(2, 3);
    ensure(
        c.stationary_exact.as_deref() == Some(&[third, two_thirds][..]),
        format!("stationary {:?}", c.stationary),
    )?;
    ensure(
        (c.growth_constant - 1.0583).abs() <= VENTURINI_TOL,
        format!("A = {}", c.growth_constant),
    )?;
    for k in 1..=6u32 {
        let q = transition_matrix(&builtin::t(), 1 << k).map_err(|e| e.to_string())?;
        ensure(q.pow(k).is_uniform(), format!("Q^{k} mod 2^{k} is not uniform"))?;
    }
    Ok(format!("stationary (1/3, 2/3), A = {:.5}; Q^k = J for k <= 6", c.growth_constant))
}

fn c10() -> Outcome {
    let c0 = compute_c0().c0;
    ensure((c0 - 41.677).abs() <= C0_TOL, format!("c0 = {c0}"))?;
    let r = rw_sample(230.0, 100_000, SEED).map_err(|e| e.to_string())?;
    let z = (r.mean - alpha0()).abs() / r.std_error;
    ensure(z <= RW_SIGMAS, format!("rw mean {} is {z:.2} s.e. from {}", r.mean, alpha0()))?;
    Ok(format!("c0 = {c0:.5}; rw mean {:.4} ({z:.2} s.e. from {:.5})", r.mean, alpha0()))
}

fn c11() -> Outcome {
    let lim = Limits::default();
    let te = reach_census(&builtin::teriele(), 1, 99_999, 1, &lim).map_err(|e| e.to_string())?;
    ensure(te.reached == 459, format!("te Riele: {} reach 1", te.reached))?;
    ensure(te.unresolved_count == 0, format!("te Riele: {} unresolved", te.unresolved_count))?;
    let fx = reach_census(&builtin::feix3(), 1, 200_000, 1, &lim).map_err(|e| e.to_string())?;
    ensure(fx.reached == 200_000, format!("feix3: {} reach 1", fx.reached))?;
    Ok(format!(
        "te Riele: 459 reach 1, {} certified divergent; feix3: all 200000 reach 1",
        te.divergent
    ))
}

fn c12() -> Outcome {
    let got = queneau_admissible_up_to(100);
    let want: Vec<u64> = vec![
        1, 2, 3, 5, 6, 9, 11, 14, 18, 23, 26, 29, 30, 33, 35, 39, 41, 50, 51, 53, 65, 69, 74, 81, 83, 86, 89, 90, 95, 98,
        99,
    ];
    ensure(got == want, format!("admissible {got:?}"))?;
    Ok("31 admissible n <= 100".into())
}

fn c13(slow: bool) -> Outcome {
    let lim = Limits::default();
    let start = BigUint::from(722_067_240u64);
    let runs = equal_height_tuples(&start, 200, 176, &lim).map_err(|e| e.to_string())?;
    ensure(
        runs.iter().any(|r| r.start == start && r.length == 176),
        format!("runs {:?}", runs.iter().map(|r| (r.start.to_string(), r.length)).collect::<Vec<_>>()),
    )?;
    if !slow {
        return Ok("176-run at 722067240 (2^500+1 run needs --slow)".into());
    }
    let big = (BigUint::one() << 500) + 1u32;
    let runs = equal_height_tuples(&big, 36_000, 35_654, &lim).map_err(|e| e.to_string())?;
    ensure(
        runs.iter().any(|r| r.start == big && r.length == 35_654),
        format!("runs at 2^500+1: {:?}", runs.iter().map(|r| r.length).collect::<Vec<_>>()),
    )?;
    Ok("176-run at 722067240; 35654-run at 2^500+1".into())
}

fn c14() -> Outcome {
    let t = Instant::now();
    let r = excursion_records(10_000_000, 100_000).map_err(|e| e.to_string())?;
    ensure(r.violations.is_empty(), format!("{} violations", r.violations.len()))?;
    ensure(r.unresolved.is_empty(), format!("{} unresolved", r.unresolved.len()))?;
    Ok(format!(
        "t(n) <= 8n^2 for n <= 1e7, {} champions, {:.2}s",
        r.champions.len(),
        t.elapsed().as_secs_f64()
    ))
}

fn c15() -> Outcome {
    let bound = BigInt::from(10u32).pow(30u32);
    let sols = circuit_solutions(60, 60, &-bound.clone(), &bound).map_err(|e| e.to_string())?;
    let positive: Vec<(u32, u32, String)> = sols
        .iter()
        .filter(|s| s.k >= 1 && s.l >= 1 && s.h > BigInt::from(0))
        .map(|s| (s.k, s.l, s.h.to_string()))
        .collect();
    ensure(positive == [(1, 1, "1".to_string())], format!("positive solutions {positive:?}"))?;

    let r = find_cycles(&builtin::qx_plus_1(5).unwrap(), 1, 1000, &Limits::default()).map_err(|e| e.to_string())?;
    let has = |c: &collatz_core::maps::CycleRecord, v: i64| c.elements.contains(&Num::Small(v.into()));
    let cyc = r
        .cycles
        .iter()
        .find(|c| has(c, 13) && has(c, 208))
        .ok_or("no 5x+1 cycle through 13 and 208")?;
    let shape = circuit_shape(cyc).ok_or("the cycle is not a single circuit")?;
    Ok(format!(
        "only (k, l, h) = (1, 1, 1); 5x+1 cycle {{13, ..., 208, ...}} is one circuit with (k, l) = {shape:?}"
    ))
}

fn c16() -> Outcome {
    use common::*;
    let checks: [(&str, Check); 9] = [
        ("Kuttler", kuttler(20, 1000)),
        ("Cadogan", cadogan(10_000)),
        ("h = sigma_inf + d", height_identity(20_000)),
        ("parity prefix", parity_prefix_congruence(16, 100_000)),
        ("cycle values", bohm_sontacchi(16)),
        ("bijectivity", permutations(2_000, 20_000)),
        ("FRACTRAN determinism", fractran_determinism(500)),
        ("row sums", row_stochastic(30)),
        ("Bringer", bringer(10_000)),
    ];
    let mut failed = Vec::new();
    for (name, c) in &checks {
        if let Err(w) = c {
            failed.push(format!("{name}: {w}"));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} property suites", checks.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn main() {
    let slow = std::env::args().any(|a| a == "--slow") || std::env::var_os("COLLATZ_SLOW").is_some_and(|v| v != "0");
    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(c1)),
        (2, Box::new(c2)),
        (3, Box::new(c3)),
        (4, Box::new(c4)),
        (5, Box::new(c5)),
        (6, Box::new(c6)),
        (7, Box::new(c7)),
        (8, Box::new(c8)),
        (9, Box::new(c9)),
        (10, Box::new(c10)),
        (11, Box::new(c11)),
        (12, Box::new(c12)),
        (13, Box::new(move || c13(slow))),
        (14, Box::new(c14)),
        (15, Box::new(c15)),
        (16, Box::new(c16)),
    ];
    let mut failed = Vec::new();
    for (i, f) in &criteria {
        match f() {
            Ok(s) => println!("PASS {i:>2}  {s}"),
            Err(s) => {
                println!("FAIL {i:>2}  {s}");
                failed.push(*i);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    let unexpected: Vec<u32> = failed.iter().copied().filter(|i| !KNOWN_FAILURES.contains(i)).collect();
    let fixed: Vec<u32> = KNOWN_FAILURES.iter().copied().filter(|i| !failed.contains(i)).collect();
    if !fixed.is_empty() {
        println!("note: criteria {fixed:?} are listed as known failures but passed");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
    if !failed.is_empty() {
        println!("known failures: {failed:?}");
    }
}
