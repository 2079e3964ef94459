//! Forward iteration, cycle certification and range cycle searches.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::num::Num;
use super::spec::{MapKind, MapSpec, NamedMap};
use crate::error::{Error, Result};
use crate::parity::ParityVector;

pub const DEFAULT_STEP_LIMIT: u64 = 100_000;
pub const DEFAULT_MAGNITUDE_BITS: u64 = 1024;

#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    pub targets: Vec<Num>,
    pub step_limit: u64,
    /// Iteration stops once `|x|` needs more than this many bits.
    pub magnitude_bits: u64,
    pub record_iterates: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            targets: Vec::new(),
            step_limit: DEFAULT_STEP_LIMIT,
            magnitude_bits: DEFAULT_MAGNITUDE_BITS,
            record_iterates: true,
        }
    }
}

impl TrajectoryOptions {
    pub fn to_target(target: i128) -> Self {
        TrajectoryOptions {
            targets: vec![Num::Small(target)],
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.step_limit == 0 || self.magnitude_bits == 0 {
            return Err(Error::usage("step and magnitude limits must be positive"));
        }
        Ok(())
    }
}

/// A periodic orbit, rotated so the element of least absolute value comes first
/// (the negative one on a tie).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    #[serde(with = "crate::report::decimal_vec")]
    pub elements: Vec<Num>,
    pub period: usize,
    pub odd_count: usize,
    /// First element of the canonical rotation.
    #[serde(with = "crate::report::decimal")]
    pub min: Num,
    pub map: String,
}

fn canonical_key(x: &Num) -> (num_bigint::BigUint, bool) {
    (x.to_big().magnitude().clone(), !x.is_negative())
}

impl CycleRecord {
    /// Builds the record from any element of the cycle.
    fn from_orbit(map: &MapSpec, mut orbit: Vec<Num>) -> CycleRecord {
        let (imin, _) = orbit
            .iter()
            .enumerate()
            .min_by(|a, b| canonical_key(a.1).cmp(&canonical_key(b.1)))
            .expect("cycles are non-empty");
        orbit.rotate_left(imin);
        CycleRecord {
            period: orbit.len(),
            odd_count: orbit.iter().filter(|x| x.is_odd()).count(),
            min: orbit[0].clone(),
            elements: orbit,
            map: map.name.clone(),
        }
    }

    /// Replays the map around the element list.
    pub fn verify(&self, map: &MapSpec) -> Result<bool> {
        let n = self.elements.len();
        for i in 0..n {
            if map.step(&self.elements[i])? != self.elements[(i + 1) % n] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    ReachedTarget {
        #[serde(with = "crate::report::decimal")]
        value: Num,
    },
    EnteredCycle { cycle: CycleRecord },
    StepLimit,
    MagnitudeLimit,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    #[serde(with = "crate::report::decimal")]
    pub start: Num,
    /// `x_0 = start, x_1, ...`, empty unless recording was requested.
    #[serde(with = "crate::report::decimal_vec")]
    pub iterates: Vec<Num>,
    pub termination: Termination,
    /// Parity of `x_0 .. x_{steps-1}`.
    pub parity: ParityVector,
    pub steps: u64,
    #[serde(with = "crate::report::decimal")]
    pub max: Num,
    #[serde(with = "crate::report::decimal")]
    pub last: Num,
}

/// Iterate `map` from `x` until a target, a certified cycle, or a limit.
pub fn trajectory(map: &MapSpec, x: &Num, opts: &TrajectoryOptions) -> Result<Trajectory> {
    opts.validate()?;
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(x.clone());
    }
    let mut parity = ParityVector::new();
    let mut cur = x.clone();
    let mut max = x.clone();
    let mut tortoise = x.clone();
    let mut power: u64 = 1;
    let mut lam: u64 = 0;
    let mut steps: u64 = 0;

    let termination = loop {
        if opts.targets.contains(&cur) {
            break Termination::ReachedTarget { value: cur.clone() };
        }
        if steps == opts.step_limit {
            break Termination::StepLimit;
        }
        parity.push(cur.is_odd());
        let next = map.step(&cur)?;
        steps += 1;
        if next > max {
            max = next.clone();
        }
        if opts.record_iterates {
            iterates.push(next.clone());
        }
        if next.bits() > opts.magnitude_bits {
            cur = next;
            break Termination::MagnitudeLimit;
        }
        lam += 1;
        if next == tortoise {
            let cycle = extract_cycle(map, &next, lam as usize)?;
            cur = next;
            break Termination::EnteredCycle { cycle };
        }
        if power == lam {
            tortoise = next.clone();
            power *= 2;
            lam = 0;
        }
        cur = next;
    };
    Ok(Trajectory {
        start: x.clone(),
        iterates,
        termination,
        parity,
        steps,
        max,
        last: cur,
    })
}

fn extract_cycle(map: &MapSpec, on_cycle: &Num, period: usize) -> Result<CycleRecord> {
    let mut orbit = Vec::with_capacity(period);
    let mut y = on_cycle.clone();
    for _ in 0..period {
        orbit.push(y.clone());
        y = map.step(&y)?;
    }
    debug_assert_eq!(&y, on_cycle);
    Ok(CycleRecord::from_orbit(map, orbit))
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub step_limit: u64,
    pub magnitude_bits: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            step_limit: DEFAULT_STEP_LIMIT,
            magnitude_bits: DEFAULT_MAGNITUDE_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unresolved {
    pub start: i128,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleSearch {
    pub lo: i128,
    pub hi: i128,
    /// Sorted by canonical first element.
    pub cycles: Vec<CycleRecord>,
    /// Sorted by start.
    pub unresolved: Vec<Unresolved>,
}

impl CycleSearch {
    pub fn periods(&self) -> Vec<usize> {
        self.cycles.iter().map(|c| c.period).collect()
    }

    pub fn cycle_containing(&self, x: i128) -> Option<&CycleRecord> {
        let x = Num::Small(x);
        self.cycles.iter().find(|c| c.elements.contains(&x))
    }
}

/// Chunk boundaries are fixed so that results never depend on thread count.
const CHUNK: i128 = 4096;

#[derive(Clone)]
enum Fate {
    Target,
    Cycle(Num),
    Unresolved(String),
}

/// Every cycle reached from a start in `[lo, hi]`, with unresolved starts listed.
pub fn find_cycles(map: &MapSpec, lo: i128, hi: i128, opts: &Limits) -> Result<CycleSearch> {
    if lo > hi {
        return Err(Error::usage(format!("empty range [{lo}, {hi}]")));
    }
    if opts.step_limit == 0 || opts.magnitude_bits == 0 {
        return Err(Error::usage("step and magnitude limits must be positive"));
    }
    let mut chunks = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(CHUNK - 1).min(hi);
        chunks.push((a, b));
        if b == i128::MAX {
            break;
        }
        a = b + 1;
    }
    let parts: Vec<(BTreeMap<Num, CycleRecord>, Vec<Unresolved>)> = chunks
        .par_iter()
        .map(|&(a, b)| search_chunk(map, a, b, opts))
        .collect();
    let mut cycles = BTreeMap::new();
    let mut unresolved = Vec::new();
    for (c, u) in parts {
        cycles.extend(c);
        unresolved.extend(u);
    }
    Ok(CycleSearch {
        lo,
        hi,
        cycles: cycles.into_values().collect(),
        unresolved,
    })
}

fn search_chunk(
    map: &MapSpec,
    lo: i128,
    hi: i128,
    opts: &Limits,
) -> (BTreeMap<Num, CycleRecord>, Vec<Unresolved>) {
    let mut fates: HashMap<i128, Fate> = HashMap::new();
    let mut cycles = BTreeMap::new();
    let mut unresolved = Vec::new();
    for x in lo..=hi {
        if !fates.contains_key(&x) {
            let (fate, seen) = run_start(map, x, lo, hi, opts, None, &fates);
            for v in seen {
                fates.entry(v).or_insert_with(|| fate.clone());
            }
            fates.insert(x, fate);
        }
        match &fates[&x] {
            Fate::Target | Fate::Cycle(_) => {}
            Fate::Unresolved(r) => unresolved.push(Unresolved { start: x, reason: r.clone() }),
        }
    }
    // Collect distinct cycles; their elements were stored as fates on the way.
    let mut seen_mins: Vec<Num> = fates
        .values()
        .filter_map(|f| match f {
            Fate::Cycle(m) => Some(m.clone()),
            _ => None,
        })
        .collect();
    seen_mins.sort();
    seen_mins.dedup();
    for m in seen_mins {
        if let Ok(t) = trajectory(
            map,
            &m,
            &TrajectoryOptions {
                step_limit: opts.step_limit,
                magnitude_bits: opts.magnitude_bits,
                record_iterates: false,
                targets: Vec::new(),
            },
        ) {
            if let Termination::EnteredCycle { cycle } = t.termination {
                cycles.insert(m, cycle);
            }
        }
    }
    (cycles, unresolved)
}

/// Runs one start with Brent's method, stopping early on a value whose fate is known.
fn run_start(
    map: &MapSpec,
    x: i128,
    lo: i128,
    hi: i128,
    opts: &Limits,
    target: Option<&Num>,
    fates: &HashMap<i128, Fate>,
) -> (Fate, Vec<i128>) {
    let mut seen = Vec::new();
    let mut cur = Num::Small(x);
    if target == Some(&cur) {
        return (Fate::Target, seen);
    }
    let sqrt3 = matches!(map.kind, MapKind::Named(NamedMap::TeRieleSqrt3));
    let mut tortoise = cur.clone();
    let mut power: u64 = 1;
    let mut lam: u64 = 0;
    for _ in 0..opts.step_limit {
        let next = match map.step(&cur) {
            Ok(n) => n,
            Err(e) => return (Fate::Unresolved(format!("domain: {e}")), seen),
        };
        if target == Some(&next) {
            return (Fate::Target, seen);
        }
        if sqrt3 && cur.rem_euclid(3) != 0 && next.rem_euclid(3) != 0 {
            // two consecutive non-multiples of 3: the orbit increases from here on
            return (Fate::Unresolved(DIVERGENT.into()), seen);
        }
        if next.bits() > opts.magnitude_bits {
            return (Fate::Unresolved("magnitude_limit".into()), seen);
        }
        if let Num::Small(v) = next {
            if v >= lo && v <= hi {
                if let Some(f) = fates.get(&v) {
                    return (f.clone(), seen);
                }
                seen.push(v);
            }
        }
        lam += 1;
        if next == tortoise {
            return match extract_cycle(map, &next, lam as usize) {
                Ok(c) => (Fate::Cycle(c.min), seen),
                Err(e) => (Fate::Unresolved(format!("domain: {e}")), seen),
            };
        }
        if power == lam {
            tortoise = next.clone();
            power *= 2;
            lam = 0;
        }
        cur = next;
    }
    (Fate::Unresolved("step_limit".into()), seen)
}

const DIVERGENT: &str = "certified_divergent";

#[derive(Debug, Clone, Serialize)]
pub struct CycleTally {
    pub cycle: CycleRecord,
    pub starts: u64,
    pub first_start: i128,
}

/// Fates of every start in a range relative to one target value.
#[derive(Debug, Clone, Serialize)]
pub struct ReachCensus {
    pub map: String,
    pub lo: i128,
    pub hi: i128,
    #[serde(with = "crate::report::decimal")]
    pub target: Num,
    pub reached: u64,
    /// Starts that entered a cycle avoiding the target.
    pub other_cycles: Vec<CycleTally>,
    /// Starts whose orbit provably grows without bound (te Riele map only).
    pub divergent: u64,
    pub first_divergent: Option<i128>,
    pub unresolved_count: u64,
    /// The first few unresolved starts.
    pub unresolved: Vec<Unresolved>,
}

const UNRESOLVED_SAMPLE: usize = 32;

/// Counts the starts in `[lo, hi]` whose orbit hits `target`.
pub fn reach_census(map: &MapSpec, lo: i128, hi: i128, target: i128, opts: &Limits) -> Result<ReachCensus> {
    if lo > hi {
        return Err(Error::usage(format!("empty range [{lo}, {hi}]")));
    }
    if opts.step_limit == 0 || opts.magnitude_bits == 0 {
        return Err(Error::usage("step and magnitude limits must be positive"));
    }
    let target = Num::Small(target);
    let mut chunks = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(CHUNK - 1).min(hi);
        chunks.push((a, b));
        if b == i128::MAX {
            break;
        }
        a = b + 1;
    }
    let parts: Vec<Vec<(i128, Fate)>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut fates: HashMap<i128, Fate> = HashMap::new();
            let mut out = Vec::with_capacity((b - a + 1) as usize);
            for x in a..=b {
                if !fates.contains_key(&x) {
                    let (fate, seen) = run_start(map, x, a, b, opts, Some(&target), &fates);
                    for v in seen {
                        fates.entry(v).or_insert_with(|| fate.clone());
                    }
                    fates.insert(x, fate);
                }
                out.push((x, fates[&x].clone()));
            }
            out
        })
        .collect();
    let mut reached = 0;
    let mut divergent = 0;
    let mut unresolved_count = 0;
    let mut unresolved = Vec::new();
    let mut first_divergent = None;
    let mut tallies: BTreeMap<Num, (u64, i128)> = BTreeMap::new();
    for (x, fate) in parts.into_iter().flatten() {
        match fate {
            Fate::Target => reached += 1,
            Fate::Cycle(m) => tallies.entry(m).or_insert((0, x)).0 += 1,
            Fate::Unresolved(r) if r == DIVERGENT => {
                divergent += 1;
                first_divergent.get_or_insert(x);
            }
            Fate::Unresolved(r) => {
                unresolved_count += 1;
                if unresolved.len() < UNRESOLVED_SAMPLE {
                    unresolved.push(Unresolved { start: x, reason: r });
                }
            }
        }
    }
    let mut other_cycles = Vec::new();
    for (m, (starts, first_start)) in tallies {
        let cycle = extract_cycle_from(map, &m, opts)?;
        other_cycles.push(CycleTally { cycle, starts, first_start });
    }
    Ok(ReachCensus {
        map: map.name.clone(),
        lo,
        hi,
        target,
        reached,
        other_cycles,
        divergent,
        first_divergent,
        unresolved_count,
        unresolved,
    })
}

fn extract_cycle_from(map: &MapSpec, on_cycle: &Num, opts: &Limits) -> Result<CycleRecord> {
    let mut y = map.step(on_cycle)?;
    let mut period = 1;
    while &y != on_cycle {
        if period as u64 >= opts.step_limit {
            return Err(Error::usage("cycle longer than the step limit"));
        }
        y = map.step(&y)?;
        period += 1;
    }
    extract_cycle(map, on_cycle, period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{builtin, parse_map};

    #[test]
    fn census_of_t() {
        let r = reach_census(&builtin::t(), 1, 5000, 1, &Limits::default()).unwrap();
        assert_eq!(r.reached, 5000);
        let r = reach_census(&builtin::t(), -200, -1, 1, &Limits::default()).unwrap();
        assert_eq!(r.reached, 0);
        assert_eq!(r.other_cycles.len(), 3);
        assert_eq!(r.other_cycles.iter().map(|c| c.starts).sum::<u64>(), 200);
    }

    #[test]
    fn trajectory_of_27() {
        let t = trajectory(&builtin::t(), &Num::Small(27), &TrajectoryOptions::to_target(1)).unwrap();
        assert_eq!(t.steps, 70);
        assert_eq!(t.max, Num::Small(4616));
        assert_eq!(t.parity.len(), 70);
        assert_eq!(t.iterates.len(), 71);
    }

    #[test]
    fn trajectory_enters_trivial_cycle() {
        let t = trajectory(&builtin::t(), &Num::Small(1), &TrajectoryOptions::default()).unwrap();
        match t.termination {
            Termination::EnteredCycle { cycle } => {
                assert_eq!(cycle.elements, vec![Num::Small(1), Num::Small(2)]);
                assert_eq!(cycle.odd_count, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn c35_cycle() {
        let m = parse_map("d=2; 0: x/2; 1: 3x+5").unwrap();
        let t = trajectory(&m, &Num::Small(5), &TrajectoryOptions::default()).unwrap();
        match t.termination {
            Termination::EnteredCycle { cycle } => assert_eq!(
                cycle.elements,
                vec![Num::Small(5), Num::Small(20), Num::Small(10)]
            ),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn limits_trip() {
        let m = builtin::mahler();
        let t = trajectory(
            &m,
            &Num::Small(1),
            &TrajectoryOptions {
                magnitude_bits: 64,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(t.termination, Termination::MagnitudeLimit);
        let t = trajectory(
            &m,
            &Num::Small(1),
            &TrajectoryOptions {
                step_limit: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(t.termination, Termination::StepLimit);
        assert_eq!(t.last, Num::Small(27));
    }

    #[test]
    fn small_cycle_search() {
        let r = find_cycles(&builtin::t(), -300, 300, &Limits::default()).unwrap();
        let mins: Vec<String> = r.cycles.iter().map(|c| c.min.to_string()).collect();
        assert_eq!(mins, ["-17", "-5", "-1", "0", "1"]);
        assert_eq!(r.cycle_containing(-136).unwrap().period, 11);
        assert!(r.unresolved.is_empty());
    }
}
