//! FRACTRAN programs and periodically-linear machines.
//!
//! Values are kept as exponent registers over the primes that occur in the program,
//! times a cofactor that no fraction can touch.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{trajectory, AffineMap, Branch, MapSpec, Num, Trajectory, TrajectoryOptions};

/// Conway's prime-producing program. From 2 it meets exactly the powers `2^p`, `p` prime,
/// in increasing order.
pub const PRIMEGAME: [(u64, u64); 14] = [
    (17, 91),
    (78, 85),
    (19, 51),
    (23, 38),
    (29, 33),
    (77, 29),
    (95, 23),
    (77, 19),
    (1, 17),
    (11, 13),
    (13, 11),
    (15, 14),
    (15, 2),
    (55, 1),
];

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractranProgram {
    /// Reduced fractions `p/q` in program order.
    pub fractions: Vec<(u64, u64)>,
    /// Primes dividing some numerator or denominator, increasing.
    pub primes: Vec<u64>,
    num_exp: Vec<Vec<u32>>,
    den_exp: Vec<Vec<u32>>,
}

impl FractranProgram {
    pub fn new(fractions: &[(u64, u64)]) -> Result<FractranProgram> {
        if fractions.is_empty() {
            return Err(Error::usage("a FRACTRAN program needs at least one fraction"));
        }
        let mut reduced = Vec::with_capacity(fractions.len());
        for &(p, q) in fractions {
            if p == 0 || q == 0 {
                return Err(Error::usage(format!("fraction {p}/{q} is not positive")));
            }
            let g = p.gcd(&q);
            reduced.push((p / g, q / g));
        }
        let mut primes: Vec<u64> = reduced
            .iter()
            .flat_map(|&(p, q)| factor(p).into_iter().chain(factor(q)).map(|(r, _)| r))
            .collect();
        primes.sort_unstable();
        primes.dedup();
        let exps = |n: u64| {
            let f = factor(n);
            primes
                .iter()
                .map(|r| f.iter().find(|(s, _)| s == r).map_or(0, |&(_, e)| e))
                .collect::<Vec<u32>>()
        };
        let num_exp = reduced.iter().map(|&(p, _)| exps(p)).collect();
        let den_exp = reduced.iter().map(|&(_, q)| exps(q)).collect();
        Ok(FractranProgram {
            fractions: reduced,
            primes,
            num_exp,
            den_exp,
        })
    }

    pub fn primegame() -> FractranProgram {
        FractranProgram::new(&PRIMEGAME).expect("constant program is valid")
    }

    /// Lowest common multiple of the denominators.
    pub fn period(&self) -> BigUint {
        self.fractions
            .iter()
            .fold(BigUint::one(), |acc, &(_, q)| acc.lcm(&BigUint::from(q)))
    }

    /// The same machine as a periodically-linear map `n -> a_j n` for `n = j mod N`,
    /// with `a_j = 1` where no fraction applies. Only for `N <= max_period`.
    pub fn as_map(&self, max_period: u64) -> Result<MapSpec> {
        let n = self
            .period()
            .to_u64()
            .filter(|&n| n <= max_period)
            .ok_or_else(|| Error::usage(format!("denominator period exceeds {max_period}")))?;
        let branches = (0..n.max(2))
            .map(|j| {
                let f = self.fractions.iter().find(|&&(_, q)| j % q == 0);
                let (p, q) = f.copied().unwrap_or((1, 1));
                Branch::new(
                    BigRational::new(BigInt::from(p), BigInt::from(q)),
                    BigRational::zero(),
                )
            })
            .collect();
        Ok(MapSpec::affine("fractran", AffineMap::new(n.max(2), branches)?))
    }
}

impl fmt::Display for FractranProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, q) in &self.fractions {
            writeln!(f, "{p}/{q}")?;
        }
        Ok(())
    }
}

/// One fraction per line (`p/q`, or several separated by spaces or commas); `#` starts a comment.
impl FromStr for FractranProgram {
    type Err = Error;

    fn from_str(s: &str) -> Result<FractranProgram> {
        let mut fractions = Vec::new();
        let mut offset = 0;
        for line in s.split_inclusive('\n') {
            let body = line.split('#').next().unwrap_or("");
            let mut col = 0;
            for tok in body.split(|c: char| c.is_whitespace() || c == ',') {
                let at = offset + col;
                col += tok.len() + 1;
                if tok.is_empty() {
                    continue;
                }
                let bad = |m: &str| Error::Syntax {
                    position: at,
                    message: format!("{m}: `{tok}`"),
                };
                let (p, q) = match tok.split_once('/') {
                    Some((p, q)) => (p, q),
                    None => (tok, "1"),
                };
                let p: u64 = p.parse().map_err(|_| bad("bad numerator"))?;
                let q: u64 = q.parse().map_err(|_| bad("bad denominator"))?;
                if p == 0 || q == 0 {
                    return Err(bad("fractions must be positive"));
                }
                fractions.push((p, q));
            }
            offset += line.len();
        }
        FractranProgram::new(&fractions)
    }
}

/// A machine value split as `cofactor * prod primes[i]^exponents[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MachineState {
    #[serde(with = "crate::report::decimal")]
    pub cofactor: BigUint,
    pub exponents: Vec<u64>,
    pub steps: u64,
}

impl MachineState {
    pub fn new(prog: &FractranProgram, m: &BigUint) -> Result<MachineState> {
        if m.is_zero() {
            return Err(Error::usage("FRACTRAN values are positive"));
        }
        let mut cofactor = m.clone();
        let mut exponents = vec![0u64; prog.primes.len()];
        for (i, &p) in prog.primes.iter().enumerate() {
            let p = BigUint::from(p);
            loop {
                let (q, r) = cofactor.div_rem(&p);
                if !r.is_zero() {
                    break;
                }
                cofactor = q;
                exponents[i] += 1;
            }
        }
        Ok(MachineState {
            cofactor,
            exponents,
            steps: 0,
        })
    }

    pub fn value(&self, prog: &FractranProgram) -> BigUint {
        let mut v = self.cofactor.clone();
        for (&p, &e) in prog.primes.iter().zip(&self.exponents) {
            v *= num_traits::pow(BigUint::from(p), e as usize);
        }
        v
    }

    /// `Some(e)` when the value is `2^e`.
    pub fn power_of_two(&self, prog: &FractranProgram) -> Option<u64> {
        let mut e = 0u64;
        for (&p, &x) in prog.primes.iter().zip(&self.exponents) {
            if p == 2 {
                e += x;
            } else if x != 0 {
                return None;
            }
        }
        let c = &self.cofactor;
        let tz = c.trailing_zeros()?;
        (c >> tz).is_one().then_some(e + tz)
    }
}

fn applicable(prog: &FractranProgram, r: usize, exps: &[u64]) -> bool {
    prog.den_exp[r].iter().zip(exps).all(|(&d, &x)| x >= d as u64)
}

/// Apply the first applicable fraction; returns its index, or `None` when none applies.
pub fn step_state(prog: &FractranProgram, st: &mut MachineState) -> Option<usize> {
    let r = (0..prog.fractions.len()).find(|&r| applicable(prog, r, &st.exponents))?;
    for (i, x) in st.exponents.iter_mut().enumerate() {
        *x = *x - prog.den_exp[r][i] as u64 + prog.num_exp[r][i] as u64;
    }
    st.steps += 1;
    Some(r)
}

/// `f m` for the first fraction `f` with `f m` an integer.
pub fn fractran_step(prog: &FractranProgram, m: &BigUint) -> Result<Option<BigUint>> {
    let mut st = MachineState::new(prog, m)?;
    Ok(step_state(prog, &mut st).map(|_| st.value(prog)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    /// Every power of 2 met after the start is an output.
    PowerOfTwo,
    ValueReached(BigUint),
    /// Run out the step budget; the final value is the output.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractranOutput {
    pub step: u64,
    #[serde(with = "crate::report::decimal")]
    pub value: BigUint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    /// No fraction applies.
    Halted,
    /// The requested number of outputs was produced.
    Outputs,
    /// The step budget ran out first.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub outputs: Vec<FractranOutput>,
    pub steps: u64,
    pub end: RunEnd,
}

/// A resumable run: call [`FractranMachine::run`] repeatedly to stream outputs.
#[derive(Debug, Clone)]
pub struct FractranMachine {
    pub program: FractranProgram,
    pub state: MachineState,
    halted: bool,
}

impl FractranMachine {
    pub fn new(program: FractranProgram, m0: &BigUint) -> Result<FractranMachine> {
        let state = MachineState::new(&program, m0)?;
        Ok(FractranMachine {
            program,
            state,
            halted: false,
        })
    }

    pub fn value(&self) -> BigUint {
        self.state.value(&self.program)
    }

    /// Runs until `max_outputs` outputs, a halt, or `max_steps` further steps.
    pub fn run(&mut self, halt: &Halt, max_outputs: usize, max_steps: u64) -> RunReport {
        let mut outputs = Vec::new();
        let start = self.state.steps;
        let end = loop {
            if self.halted {
                break RunEnd::Halted;
            }
            if outputs.len() >= max_outputs && *halt != Halt::StepLimit {
                break RunEnd::Outputs;
            }
            if self.state.steps - start == max_steps {
                if *halt == Halt::StepLimit {
                    outputs.push(self.output());
                    break RunEnd::Outputs;
                }
                break RunEnd::Budget;
            }
            if step_state(&self.program, &mut self.state).is_none() {
                self.halted = true;
                if *halt == Halt::StepLimit {
                    outputs.push(self.output());
                }
                continue;
            }
            match halt {
                Halt::PowerOfTwo => {
                    if let Some(e) = self.state.power_of_two(&self.program) {
                        outputs.push(FractranOutput {
                            step: self.state.steps,
                            value: self.value(),
                            log2: Some(e),
                        });
                    }
                }
                Halt::ValueReached(v) => {
                    if self.value() == *v {
                        outputs.push(self.output());
                    }
                }
                Halt::StepLimit => {}
            }
        };
        RunReport {
            outputs,
            steps: self.state.steps,
            end,
        }
    }

    fn output(&self) -> FractranOutput {
        FractranOutput {
            step: self.state.steps,
            value: self.value(),
            log2: self.state.power_of_two(&self.program),
        }
    }
}

/// Runs `prog` from `m0` under `halt`, collecting up to `max_outputs` outputs.
pub fn fractran_run(
    prog: &FractranProgram,
    m0: &BigUint,
    halt: &Halt,
    max_outputs: usize,
    max_steps: u64,
) -> Result<RunReport> {
    let mut m = FractranMachine::new(prog.clone(), m0)?;
    Ok(m.run(halt, max_outputs, max_steps))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub step: u64,
    #[serde(with = "crate::report::decimal")]
    pub value: BigUint,
    pub registers: Vec<u64>,
    pub fraction: Option<usize>,
}

/// The first `steps` states, one row per step, starting with `m0`.
pub fn fractran_trace(prog: &FractranProgram, m0: &BigUint, steps: u64) -> Result<Vec<TraceRow>> {
    let mut st = MachineState::new(prog, m0)?;
    let mut rows = vec![TraceRow {
        step: 0,
        value: st.value(prog),
        registers: st.exponents.clone(),
        fraction: None,
    }];
    for _ in 0..steps {
        let Some(r) = step_state(prog, &mut st) else {
            break;
        };
        rows.push(TraceRow {
            step: st.steps,
            value: st.value(prog),
            registers: st.exponents.clone(),
            fraction: Some(r),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConwayRun {
    pub trajectory: Trajectory,
    /// `(step, e)` for every iterate equal to `2^e`, the start included.
    pub powers_of_two: Vec<(u64, u64)>,
}

/// Iterates a map whose branches are all of the form `x -> a_j x`.
pub fn conway_iterate(map: &MapSpec, n0: &BigUint, opts: &TrajectoryOptions) -> Result<ConwayRun> {
    let affine = map
        .as_affine()
        .ok_or_else(|| Error::usage("a periodically-linear machine needs a residue-affine map"))?;
    if !affine.branches.iter().all(|b| b.is_pure_multiplier()) {
        return Err(Error::usage("every branch must be a pure multiplier a_j x"));
    }
    let opts = TrajectoryOptions {
        record_iterates: true,
        ..opts.clone()
    };
    let t = trajectory(map, &Num::from_big(BigInt::from(n0.clone())), &opts)?;
    let powers_of_two = t
        .iterates
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let b = v.to_big();
            let tz = b.trailing_zeros()?;
            ((&b >> tz).is_one()).then_some((i as u64, tz))
        })
        .collect();
    Ok(ConwayRun {
        trajectory: t,
        powers_of_two,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn single_steps() {
        let p = FractranProgram::new(&[(3, 2)]).unwrap();
        assert_eq!(fractran_step(&p, &big(2)).unwrap(), Some(big(3)));
        assert_eq!(fractran_step(&p, &big(3)).unwrap(), None);
        let r = fractran_run(&p, &big(1), &Halt::PowerOfTwo, 5, 100).unwrap();
        assert!(r.outputs.is_empty());
        assert_eq!(r.end, RunEnd::Halted);
    }

    #[test]
    fn primegame_first_primes() {
        let r = fractran_run(&FractranProgram::primegame(), &big(2), &Halt::PowerOfTwo, 5, 1 << 20).unwrap();
        let e: Vec<u64> = r.outputs.iter().map(|o| o.log2.unwrap()).collect();
        assert_eq!(e, [2, 3, 5, 7, 11]);
        assert_eq!(r.outputs[0].step, 19);
    }

    #[test]
    fn streaming_matches_one_shot() {
        let mut m = FractranMachine::new(FractranProgram::primegame(), &big(2)).unwrap();
        let a = m.run(&Halt::PowerOfTwo, 3, 1 << 20);
        let b = m.run(&Halt::PowerOfTwo, 3, 1 << 20);
        let all = fractran_run(&FractranProgram::primegame(), &big(2), &Halt::PowerOfTwo, 6, 1 << 20).unwrap();
        let joined: Vec<_> = a.outputs.into_iter().chain(b.outputs).collect();
        assert_eq!(joined, all.outputs);
    }

    #[test]
    fn parse_program() {
        let p: FractranProgram = "# doubling\n21/10 5/7, 26/33\n11/13 2/11\n11/5\n5\n".parse().unwrap();
        assert_eq!(p.fractions.len(), 7);
        assert_eq!(p.fractions[6], (5, 1));
        let e = "3/2\n4/x".parse::<FractranProgram>().unwrap_err();
        assert!(matches!(e, Error::Syntax { position: 4, .. }), "{e:?}");
        assert!("".parse::<FractranProgram>().is_err());
        assert!("0/3".parse::<FractranProgram>().is_err());
    }

    #[test]
    fn doubling_program() {
        let p: FractranProgram = "21/10 5/7 26/33 11/13 2/11 11/5 5/1".parse().unwrap();
        for n in 1..6u64 {
            let r = fractran_run(&p, &(big(1) << n), &Halt::PowerOfTwo, 1, 1 << 16).unwrap();
            assert_eq!(r.outputs[0].log2, Some(n + 1), "n={n}");
        }
    }

    #[test]
    fn value_and_step_limit_halts() {
        let p = FractranProgram::primegame();
        let r = fractran_run(&p, &big(2), &Halt::ValueReached(big(4)), 1, 1000).unwrap();
        assert_eq!(r.outputs[0].step, 19);
        let r = fractran_run(&p, &big(2), &Halt::StepLimit, 1, 1).unwrap();
        assert_eq!(r.outputs[0].value, big(15));
        let r = fractran_run(&p, &big(2), &Halt::PowerOfTwo, 1, 10).unwrap();
        assert_eq!(r.end, RunEnd::Budget);
    }

    #[test]
    fn registers_track_value() {
        let p = FractranProgram::primegame();
        let rows = fractran_trace(&p, &big(2), 300).unwrap();
        for w in rows.windows(2) {
            let st = MachineState::new(&p, &w[1].value).unwrap();
            assert_eq!(st.exponents, w[1].registers);
            let r = w[1].fraction.unwrap();
            let prev = &w[0].value;
            assert!((prev % p.fractions[r].1).is_zero());
            for &(_, q) in &p.fractions[..r] {
                assert!(!(prev % q).is_zero());
            }
        }
    }

    #[test]
    fn conway_machine() {
        let p: FractranProgram = "21/10 5/7 26/33 11/13 2/11 11/5 5/1".parse().unwrap();
        let map = p.as_map(1 << 16).unwrap();
        let run = conway_iterate(&map, &big(2), &TrajectoryOptions::to_target(4)).unwrap();
        assert_eq!(run.powers_of_two.first(), Some(&(0, 1)));
        assert_eq!(run.powers_of_two.last().map(|p| p.1), Some(2));
        let ident = crate::maps::parse_map("d=2; 0: x; 1: x").unwrap();
        let run = conway_iterate(&ident, &big(7), &TrajectoryOptions::default()).unwrap();
        assert_eq!(run.trajectory.steps, 1);
        assert!(conway_iterate(&crate::maps::builtin::t(), &big(7), &TrajectoryOptions::default()).is_err());
    }
}
