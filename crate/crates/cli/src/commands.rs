use collatz_core::bigmath::{cf_log2_3, cf_rational, convergents, parse_rat, rat_string};
use collatz_core::cycles::{
    circuit_solutions, cycle_length_lower_bound, rational_cycles_3xd, scaled_cycle_value, within_three_pow,
    BoundOptions,
};
use collatz_core::fractran::{fractran_run, fractran_trace, FractranProgram, Halt};
use collatz_core::maps::{
    find_cycles, parse_map, reach_census, trajectory, Limits, MapSpec, Num, TrajectoryOptions,
};
use collatz_core::stats::{
    below_power_density, equal_height_tuples, excursion_records, stats_record, stopping_densities, verify_range,
    VerifyMode,
};
use collatz_core::trees::{extremal_spread, pi_count, tree_counts, TreeMode};
use collatz_core::{aux, kappa, markov, stochastic, twoadic, Error, ParityVector, Result};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::config::RunConfig;
use crate::output::Output;

/// Ranges larger than this need `--slow` where a command iterates every start.
const FAST_RANGE: u64 = 1_000_000;

fn val<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn limits(cfg: &RunConfig) -> Limits {
    Limits {
        step_limit: cfg.step_limit,
        magnitude_bits: cfg.magnitude_bits,
    }
}

fn map(cfg: &RunConfig) -> Result<MapSpec> {
    parse_map(&cfg.map)
}

fn is_t(m: &MapSpec) -> bool {
    m.name == "T"
}

fn need_slow(cfg: &RunConfig, cond: bool, what: &str) -> Result<()> {
    if cond && !cfg.slow {
        return Err(Error::usage(format!("{what} is slow; pass --slow to run it")));
    }
    Ok(())
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Output> {
    match cmd {
        Command::Verify(a) => verify(a, cfg),
        Command::Stats(a) => stats(a, cfg),
        Command::Records(a) => records(a, cfg),
        Command::Density(a) => density(a),
        Command::Kappa(a) => kappa_cmd(a, cfg),
        Command::Cycles(c) => cycles(c, cfg),
        Command::Tree(a) => tree(a),
        Command::Pi(a) => Ok(Output::new("pi", val(&pi_count(a.a, a.x, cfg.step_limit)?))),
        Command::Twoadic(c) => twoadic_cmd(c),
        Command::Fractran(c) => fractran(c),
        Command::Markov(c) => markov_cmd(c, cfg),
        Command::Stochastic(c) => stochastic_cmd(c, cfg),
        Command::Aux(c) => aux_cmd(c, cfg),
        Command::Cf(a) => cf(a),
    }
}

fn verify(a: &VerifyArgs, cfg: &RunConfig) -> Result<Output> {
    let m = map(cfg)?;
    if is_t(&m) {
        let mode = if a.sieve == 0 { VerifyMode::Naive } else { VerifyMode::Sieve { k: a.sieve } };
        let r = verify_range(a.to, mode, cfg.step_limit)?;
        return Ok(Output::new("verify", val(&r)));
    }
    let hi = i128::from(a.to);
    let r = reach_census(&m, 1, hi, a.target, &limits(cfg))?;
    let claim = format!("every 1 <= n <= {} reaches {} under {}", a.to, a.target, m.name);
    if let Some(c) = r.other_cycles.first() {
        return Err(Error::falsified(claim, format!("n = {} enters the cycle at {}", c.first_start, c.cycle.min)));
    }
    if let Some(n) = r.first_divergent {
        return Err(Error::falsified(claim, format!("n = {n} diverges")));
    }
    let mut v = val(&r);
    v["verified"] = json!(r.reached == a.to);
    v["max_n"] = json!(a.to);
    Ok(Output::new("verify_map", v))
}

fn stats(a: &StatsArgs, cfg: &RunConfig) -> Result<Output> {
    let m = map(cfg)?;
    let lim = limits(cfg);
    if let Some(n) = &a.n {
        if n.bits() == 0 {
            return Err(Error::usage("orbit statistics need n >= 1"));
        }
        if is_t(&m) {
            return Ok(Output::new("stats", val(&stats_record(n, &lim))));
        }
        let opts = TrajectoryOptions {
            targets: vec![Num::Small(1)],
            step_limit: cfg.step_limit,
            magnitude_bits: cfg.magnitude_bits,
            record_iterates: false,
        };
        let t = trajectory(&m, &Num::from_big(n.clone().into()), &opts)?;
        return Ok(Output::new("trajectory", val(&t)));
    }
    let (Some(lo), Some(hi)) = (a.from, a.to) else {
        return Err(Error::usage("give a value or --from/--to"));
    };
    if !is_t(&m) {
        return Err(Error::usage("range statistics are for T; use `cycles find` for other maps"));
    }
    if lo == 0 || lo > hi {
        return Err(Error::usage("need 1 <= from <= to"));
    }
    need_slow(cfg, hi - lo >= FAST_RANGE, "a range of more than 10^6 values")?;
    let rows: Vec<Value> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let r = stats_record(&BigUint::from(n), &lim);
            json!({
                "n": n,
                "sigma": r.sigma,
                "sigma_inf": r.sigma_inf,
                "d_odd": r.d_odd,
                "height": r.height,
                "gamma": r.gamma,
                "excursion": r.excursion.to_string(),
            })
        })
        .collect();
    Ok(Output::new("stats_range", json!({ "from": lo, "to": hi, "rows": rows })).with_rows("/rows"))
}

fn records(a: &RecordsArgs, cfg: &RunConfig) -> Result<Output> {
    match a.kind {
        RecordKind::Excursion => {
            let to = a.to.ok_or_else(|| Error::usage("excursion records need --to"))?;
            need_slow(cfg, to > 100_000_000, "an excursion sweep past 10^8")?;
            let r = excursion_records(to, cfg.step_limit)?;
            let mut v = val(&r);
            v["bound_holds"] = json!(r.violations.is_empty());
            Ok(Output::new("excursion_records", v).with_rows("/champions"))
        }
        RecordKind::Heights => {
            let from = a.from.clone().ok_or_else(|| Error::usage("equal-height runs need --from"))?;
            need_slow(
                cfg,
                (from.bits() > 128 && a.count > 10_000) || a.count > 100_000_000,
                "this equal-height window",
            )?;
            let runs = equal_height_tuples(&from, a.count, a.min_len, &limits(cfg))?;
            Ok(Output::new(
                "equal_height_runs",
                json!({ "from": from.to_string(), "count": a.count, "min_len": a.min_len, "runs": val(&runs) }),
            )
            .with_rows("/runs"))
        }
    }
}

fn density(a: &DensityArgs) -> Result<Output> {
    match a.kind {
        DensityKind::Stopping => {
            let d = stopping_densities(a.k)?;
            let rows: Vec<Value> = d
                .iter()
                .enumerate()
                .map(|(i, r)| json!({ "k": i + 1, "density": rat_string(r), "value": r.to_f64() }))
                .collect();
            Ok(Output::new("stopping_densities", json!({ "k": a.k, "rows": rows })).with_rows("/rows"))
        }
        DensityKind::BelowPower => {
            let beta = parse_rat(&a.beta).ok_or_else(|| Error::usage(format!("bad rational {:?}", a.beta)))?;
            let r = below_power_density(&beta, a.to, a.steps)?;
            Ok(Output::new("below_power_density", val(&r)))
        }
    }
}

fn kappa_cmd(a: &KappaArgs, cfg: &RunConfig) -> Result<Output> {
    if let Some(k) = a.verify {
        let r = kappa::verify_cstc(k)?;
        if let Some(n) = r.counterexample {
            return Err(Error::falsified("kappa(n) = sigma(n)", n));
        }
        return Ok(Output::new("cstc", val(&r)));
    }
    let n = a.n.as_ref().ok_or_else(|| Error::usage("give n or --verify K"))?;
    Ok(Output::new("kappa", val(&kappa::kappa_record(n, cfg.step_limit)?)))
}

fn cycles(c: &CyclesCmd, cfg: &RunConfig) -> Result<Output> {
    match c {
        CyclesCmd::Find { from, to } => {
            let m = map(cfg)?;
            need_slow(cfg, to.saturating_sub(*from) > 10 * FAST_RANGE as i128, "a range of more than 10^7 starts")?;
            let r = find_cycles(&m, *from, *to, &limits(cfg))?;
            for c in &r.cycles {
                if !c.verify(&m)? {
                    return Err(Error::falsified("cycle replays under the map", c.min.to_string()));
                }
            }
            let mut v = val(&r);
            v["count"] = json!(r.cycles.len());
            v["map"] = json!(m.name);
            Ok(Output::new("cycles_find", v).with_rows("/cycles"))
        }
        CyclesCmd::Value { parity, d } => {
            let p: ParityVector = parity.parse()?;
            let v = scaled_cycle_value(&p, *d)?;
            let mut out = val(&v);
            if *d == 1 {
                out["within_three_pow"] = json!(within_three_pow(&v));
            }
            out["d"] = json!(d);
            Ok(Output::new("cycle_value", out))
        }
        CyclesCmd::Bound { verified, cutoff, window_only, list_limit } => {
            let opts = BoundOptions {
                cutoff: *cutoff,
                refine: !window_only,
                list_limit: *list_limit,
                ..Default::default()
            };
            Ok(Output::new("cycle_bound", val(&cycle_length_lower_bound(verified, &opts)?)))
        }
        CyclesCmd::Circuit { k_max, l_max, h_lo, h_hi } => {
            let s = circuit_solutions(*k_max, *l_max, h_lo, h_hi)?;
            Ok(Output::new(
                "circuit_solutions",
                json!({ "k_max": k_max, "l_max": l_max, "h_lo": h_lo.to_string(), "h_hi": h_hi.to_string(), "solutions": val(&s) }),
            )
            .with_rows("/solutions"))
        }
        CyclesCmd::Rational { d, max_period } => {
            let c = rational_cycles_3xd(*d, *max_period)?;
            Ok(Output::new(
                "rational_cycles",
                json!({ "d": d, "max_period": max_period, "count": c.len(), "cycles": val(&c) }),
            )
            .with_rows("/cycles"))
        }
    }
}

fn tree(a: &TreeArgs) -> Result<Output> {
    if let Some(sp) = &a.spread {
        let r = extremal_spread(a.depth, sp[0], sp[1], a.classes)?;
        return Ok(Output::new("tree_spread", val(&r)));
    }
    let root = a.root.ok_or_else(|| Error::usage("give --root or --spread LO HI"))?;
    let mode = if a.full { TreeMode::Full } else { TreeMode::Counts };
    let t = tree_counts(root, a.depth, mode)?;
    let levels: Vec<Value> = t
        .counts
        .iter()
        .enumerate()
        .map(|(i, c)| json!({ "depth": i, "count": c }))
        .collect();
    let mut v = json!({ "root": root, "depth": a.depth, "leaves": t.leaves(), "levels": levels });
    if let Some(edges) = t.edge_list() {
        v["edges"] = json!(edges.lines().collect::<Vec<_>>());
    }
    Ok(Output::new("tree", v).with_rows("/levels"))
}

fn twoadic_cmd(c: &TwoadicCmd) -> Result<Output> {
    match c {
        TwoadicCmd::Order { n } => {
            let mut v = val(&twoadic::perm_analysis(*n)?);
            if let Some(o) = v.as_object_mut() {
                o.remove("fixed_points");
            }
            Ok(Output::new("twoadic_order", v))
        }
        TwoadicCmd::Fixed { n } => {
            let r = twoadic::perm_analysis(*n)?;
            let rows: Vec<Value> = r.fixed_points.iter().map(|x| json!({ "residue": x })).collect();
            Ok(Output::new("twoadic_fixed", json!({ "n": n, "count": r.fixed_point_count, "fixed_points": rows }))
                .with_rows("/fixed_points"))
        }
        TwoadicCmd::Check { n } => Ok(Output::new("twoadic_check", val(&twoadic::conjugacy_check(*n)?))),
    }
}

fn load_program(p: &ProgramArgs) -> Result<FractranProgram> {
    if p.primegame {
        return Ok(FractranProgram::primegame());
    }
    let path = p.program.as_ref().ok_or_else(|| Error::usage("give --program FILE or --primegame"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::usage(format!("cannot read {}: {e}", path.display())))?;
    text.parse()
}

fn fractran(c: &FractranCmd) -> Result<Output> {
    match c {
        FractranCmd::Run { program, hits, max_steps } => {
            let prog = load_program(program)?;
            let r = fractran_run(&prog, &program.start, &Halt::PowerOfTwo, *hits, *max_steps)?;
            let exps: Vec<u64> = r.outputs.iter().filter_map(|o| o.log2).collect();
            let mut v = val(&r);
            v["exponents"] = json!(exps);
            v["program"] = json!(prog.fractions.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>());
            Ok(Output::new("fractran_run", v).with_rows("/outputs"))
        }
        FractranCmd::Step { program, steps } => {
            let prog = load_program(program)?;
            let rows = fractran_trace(&prog, &program.start, *steps)?;
            Ok(Output::new(
                "fractran_trace",
                json!({ "program": prog.fractions.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>(), "primes": prog.primes, "rows": val(&rows) }),
            )
            .with_rows("/rows"))
        }
    }
}

fn markov_cmd(c: &MarkovCmd, cfg: &RunConfig) -> Result<Output> {
    let m = map(cfg)?;
    match c {
        MarkovCmd::Matrix { modulus, power } => {
            let q = markov::transition_matrix(&m, *modulus)?;
            let mut v = val(&q);
            v["map"] = json!(m.name);
            v["row_stochastic"] = json!(q.row_sums_are_one());
            if let Some(k) = power {
                v["power"] = json!({ "k": k, "uniform": q.pow(*k).is_uniform() });
            }
            Ok(Output::new("markov_matrix", v))
        }
        MarkovCmd::Analyze { modulus, sample, sample_steps } => {
            let r = markov::analyze(&m, *modulus)?;
            let mut v = val(&r);
            if let Some(trials) = sample {
                v["sample"] = val(&markov::sample_log_growth(&m, *trials, *sample_steps, 64, cfg.seed)?);
            }
            Ok(Output::new("markov_analysis", v))
        }
    }
}

fn stochastic_cmd(c: &StochasticCmd, cfg: &RunConfig) -> Result<Output> {
    match c {
        StochasticCmd::Rw { log_n, trials, histogram } => {
            need_slow(cfg, *trials > 10_000_000, "more than 10^7 walks")?;
            let r = stochastic::rw_sample(*log_n, *trials, cfg.seed)?;
            let h = &r.histogram;
            let rows: Vec<Value> = h
                .counts
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let lo = h.lo + i as f64 * h.width;
                    json!({ "lo": lo, "hi": lo + h.width, "count": c })
                })
                .collect();
            let mut v = val(&r);
            v["histogram_rows"] = json!(rows);
            let out = Output::new("rw_sample", v);
            Ok(if *histogram { out.with_rows("/histogram_rows") } else { out })
        }
        StochasticCmd::Bp { k, trials } => {
            need_slow(cfg, *trials > 10_000_000, "more than 10^7 trees")?;
            Ok(Output::new("bp_leafcounts", val(&stochastic::bp_leafcounts(*k, *trials, cfg.seed)?)))
        }
        StochasticCmd::C0 => Ok(Output::new("c0", val(&stochastic::compute_c0()))),
    }
}

fn aux_cmd(c: &AuxCmd, cfg: &RunConfig) -> Result<Output> {
    match c {
        AuxCmd::Queneau { to, roubaud } => {
            need_slow(cfg, *to > 100_000, "a spiral scan past 10^5")?;
            let adm = aux::queneau_admissible_up_to(*to);
            let reports = adm.iter().map(|&n| aux::queneau_report(n)).collect::<Result<Vec<_>>>()?;
            let mut v = json!({ "to": to, "count": adm.len(), "admissible": adm, "reports": val(&reports) });
            if let Some(r) = roubaud {
                let chk = aux::roubaud_check(*r)?;
                if let Some(bad) = chk.mismatches.first() {
                    return Err(Error::falsified("order criterion matches the spiral test", bad.n));
                }
                v["roubaud"] = val(&chk);
            }
            Ok(Output::new("queneau", v).with_rows("/reports"))
        }
        AuxCmd::Znumber { x, depth, fit_depth } => {
            let z = aux::znumber_scan(*x, *depth, *fit_depth)?;
            let rows: Vec<Value> = z.counts.iter().map(|(m, c)| json!({ "bound": m, "survivors": c })).collect();
            let mut v = val(&z);
            v["counts"] = json!(rows);
            Ok(Output::new("znumber_scan", v).with_rows("/counts"))
        }
        AuxCmd::Stemmler { k_lo, k_hi, rows } => {
            let r = aux::stemmler_verify(*k_lo, *k_hi, *rows)?;
            let out = Output::new("stemmler", val(&r));
            Ok(if *rows { out.with_rows("/rows") } else { out })
        }
        AuxCmd::Smooth { n, limit, m, e_max, f_max } => {
            if let Some(m) = m {
                let r = aux::collatz_smooth_check(*m, *e_max, *f_max)?;
                return Ok(Output::new("smooth_check", json!({ "found": r.found(), "check": val(&r) })));
            }
            let n = n.ok_or_else(|| Error::usage("give --n or --m"))?;
            let reps = aux::smooth_reps(n, *limit)?;
            let rows: Vec<Value> = reps
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let terms: Vec<String> = r.iter().map(|t| format!("2^{}*3^{}", t.a, t.b)).collect();
                    json!({ "index": i, "length": r.len(), "terms": terms.join(" + ") })
                })
                .collect();
            Ok(Output::new("smooth_reps", json!({ "n": n, "count": reps.len(), "limit": limit, "rows": rows }))
                .with_rows("/rows"))
        }
    }
}

fn cf(a: &CfArgs) -> Result<Output> {
    let (target, cf) = match &a.rational {
        Some(s) => {
            let r = parse_rat(s).ok_or_else(|| Error::usage(format!("bad rational {s:?}")))?;
            (rat_string(&r), cf_rational(r.numer(), r.denom())?)
        }
        None => ("log2(3)".to_string(), cf_log2_3(a.depth)?),
    };
    let rows: Vec<Value> = convergents(&cf, a.intermediate)
        .iter()
        .map(|c| json!({ "index": c.index, "p": c.p.to_string(), "q": c.q.to_string(), "principal": c.principal }))
        .collect();
    let pq: Vec<String> = cf.partial_quotients.iter().map(|q| q.to_string()).collect();
    Ok(Output::new("continued_fraction", json!({ "target": target, "partial_quotients": pq, "convergents": rows }))
        .with_rows("/convergents"))
}
