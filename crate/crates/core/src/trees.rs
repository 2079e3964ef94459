//! Inverse iteration of `T`: preimages, depth-`k` trees and their leaf counts,
//! `pi_a(x)`, and the odd-only tree.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_COUNT_DEPTH: u32 = 40;
pub const MAX_FULL_DEPTH: u32 = 30;
pub const MAX_PI_RANGE: u64 = 10_000_000;

/// Roots must stay below this so that `2^40 a` fits comfortably in `i128`.
const ROOT_LIMIT: i128 = 1 << 80;

/// `T` on `i128`; callers keep values far from overflow.
#[inline]
pub fn t_step(x: i128) -> i128 {
    if x & 1 == 0 {
        x >> 1
    } else {
        (3 * x + 1) >> 1
    }
}

/// All `n` with `T(n) = a`: `2a`, and `(2a-1)/3` when that is an integer (it is then odd).
pub fn preimages(a: i128) -> Vec<i128> {
    let mut out = vec![2 * a];
    if let Some(m) = odd_side(a) {
        out.push(m);
    }
    out
}

#[inline]
fn odd_side(a: i128) -> Option<i128> {
    let t = 2 * a - 1;
    (t.rem_euclid(3) == 0).then(|| t / 3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMode {
    Counts,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InverseTree {
    pub root: i128,
    pub depth: u32,
    /// `counts[j] = n_j(root)` for `j = 0..=depth`.
    pub counts: Vec<u64>,
    /// Sorted node lists per level (full mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<Vec<i128>>>,
}

impl InverseTree {
    pub fn leaves(&self) -> u64 {
        *self.counts.last().expect("level 0 is always present")
    }

    /// `child<TAB>parent` lines, one per edge, level by level.
    pub fn edge_list(&self) -> Option<String> {
        let levels = self.levels.as_ref()?;
        let mut out = String::new();
        for level in &levels[1..] {
            for &v in level {
                let _ = writeln!(out, "{v}\t{}", t_step(v));
            }
        }
        Some(out)
    }
}

const BLOCK: usize = 1 << 12;

fn expand(level: &[i128]) -> Vec<i128> {
    if level.len() < BLOCK {
        return level.iter().flat_map(|&v| preimages(v)).collect();
    }
    level
        .par_chunks(BLOCK)
        .map(|c| c.iter().flat_map(|&v| preimages(v)).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .concat()
}

/// `n_j(a)` for `j <= k`, with the node lists in full mode.
pub fn tree_counts(a: i128, k: u32, mode: TreeMode) -> Result<InverseTree> {
    let cap = match mode {
        TreeMode::Counts => MAX_COUNT_DEPTH,
        TreeMode::Full => MAX_FULL_DEPTH,
    };
    if k > cap {
        return Err(Error::usage(format!("tree depth {k} exceeds {cap} in {mode:?} mode")));
    }
    if a.abs() >= ROOT_LIMIT {
        return Err(Error::usage("tree root is too large"));
    }
    let mut level = vec![a];
    let mut counts = vec![1u64];
    let mut levels = (mode == TreeMode::Full).then(|| vec![level.clone()]);
    for _ in 0..k {
        level = expand(&level);
        counts.push(level.len() as u64);
        if let Some(ls) = levels.as_mut() {
            let mut sorted = level.clone();
            sorted.sort_unstable();
            ls.push(sorted);
        }
    }
    Ok(InverseTree {
        root: a,
        depth: k,
        counts,
        levels,
    })
}

/// Leaf count `n_k(a)` alone.
pub fn leaf_count(a: i128, k: u32) -> Result<u64> {
    Ok(tree_counts(a, k, TreeMode::Counts)?.leaves())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEstimate {
    /// Residue mod `3^ell`.
    pub residue: u64,
    pub roots: u64,
    /// Mean leaf count of the class divided by `(4/3)^k`.
    pub w_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    pub k: u32,
    pub lo: u64,
    pub hi: u64,
    /// Roots `a` in range with `a` not divisible by 3.
    pub unit_roots: u64,
    pub min_root: u64,
    pub min_count: u64,
    pub max_root: u64,
    pub max_count: u64,
    /// `min_count^(1/k)` and `max_count^(1/k)`.
    pub min_growth: f64,
    pub max_growth: f64,
    /// Mean leaf count over every root in range (multiples of 3 have one leaf).
    pub mean: f64,
    /// Mean over the roots not divisible by 3 only.
    pub unit_mean: f64,
    /// `(4/3)^k`.
    pub expected: f64,
    pub mean_ratio: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<ClassEstimate>,
}

/// Extremes and means of `n_k(a)` over roots `lo <= a <= hi`; `class_ell` adds the
/// per-class estimator of `W(a)` mod `3^ell`.
pub fn extremal_spread(k: u32, lo: u64, hi: u64, class_ell: Option<u32>) -> Result<SpreadReport> {
    if k == 0 || k > MAX_FULL_DEPTH {
        return Err(Error::usage(format!("spread depth must be in 1..={MAX_FULL_DEPTH}")));
    }
    if lo == 0 || lo > hi || hi > 10_000_000 {
        return Err(Error::usage("root range must satisfy 1 <= lo <= hi <= 10^7"));
    }
    if let Some(ell) = class_ell {
        if ell == 0 || ell > 12 {
            return Err(Error::usage("class depth must be in 1..=12"));
        }
    }
    let counts: Vec<(u64, u64)> = (lo..=hi)
        .into_par_iter()
        .map(|a| (a, if a % 3 == 0 { 1 } else { leaf_count(a as i128, k).expect("validated") }))
        .collect();
    let units: Vec<&(u64, u64)> = counts.iter().filter(|(a, _)| a % 3 != 0).collect();
    if units.is_empty() {
        return Err(Error::usage("root range contains no root prime to 3"));
    }
    let min = units.iter().min_by_key(|(a, c)| (*c, *a)).expect("non-empty");
    let max = units.iter().max_by_key(|(a, c)| (*c, std::cmp::Reverse(*a))).expect("non-empty");
    let expected = (4.0f64 / 3.0).powi(k as i32);
    let total: f64 = counts.iter().map(|(_, c)| *c as f64).sum();
    let unit_total: f64 = units.iter().map(|(_, c)| *c as f64).sum();
    let mean = total / counts.len() as f64;
    let classes = match class_ell {
        None => Vec::new(),
        Some(ell) => {
            let m = 3u64.pow(ell);
            let mut by: BTreeMap<u64, (u64, f64)> = BTreeMap::new();
            for (a, c) in &units {
                let e = by.entry(a % m).or_default();
                e.0 += 1;
                e.1 += *c as f64;
            }
            by.into_iter()
                .map(|(residue, (n, s))| ClassEstimate {
                    residue,
                    roots: n,
                    w_estimate: s / n as f64 / expected,
                })
                .collect()
        }
    };
    Ok(SpreadReport {
        k,
        lo,
        hi,
        unit_roots: units.len() as u64,
        min_root: min.0,
        min_count: min.1,
        max_root: max.0,
        max_count: max.1,
        min_growth: (min.1 as f64).powf(1.0 / k as f64),
        max_growth: (max.1 as f64).powf(1.0 / k as f64),
        mean,
        unit_mean: unit_total / units.len() as f64,
        expected,
        mean_ratio: mean / expected,
        classes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiReport {
    pub a: i64,
    pub x: u64,
    pub count: u64,
    /// Found by the backward search; the rest were settled by forward iteration.
    pub by_backward_search: u64,
    pub by_forward_iteration: u64,
}

const UNKNOWN: u8 = 0;
const YES: u8 = 1;
const NO: u8 = 2;

/// `pi_a(x)`: the number of `|n| <= x` whose forward orbit under `T` contains `a`.
pub fn pi_count(a: i64, x: u64, step_limit: u64) -> Result<PiReport> {
    if x > MAX_PI_RANGE {
        return Err(Error::usage(format!("pi range must be at most {MAX_PI_RANGE}")));
    }
    let xi = x as i128;
    let a128 = a as i128;
    let idx = |n: i128| (n + xi) as usize;
    let mut fate = vec![UNKNOWN; 2 * x as usize + 1];

    // Backward search, allowing detours up to a few times the range.
    let cap = 4 * xi.max(a128.abs()).max(1);
    let mut seen_out = std::collections::HashSet::new();
    let mut stack = vec![a128];
    if a128.abs() > xi {
        seen_out.insert(a128);
    }
    let mut backward = 0u64;
    while let Some(v) = stack.pop() {
        if v.abs() <= xi {
            if fate[idx(v)] == YES {
                continue;
            }
            fate[idx(v)] = YES;
            backward += 1;
        }
        for p in preimages(v) {
            if p.abs() > cap {
                continue;
            }
            if p.abs() <= xi {
                if fate[idx(p)] != YES {
                    stack.push(p);
                }
            } else if seen_out.insert(p) {
                stack.push(p);
            }
        }
    }

    // Forward pass for everything else.
    let mut forward = 0u64;
    let mut path = Vec::new();
    for n in -xi..=xi {
        if fate[idx(n)] != UNKNOWN {
            continue;
        }
        path.clear();
        let mut v = n;
        let mut steps = 0u64;
        // Brent cycle detection on the raw orbit.
        let (mut power, mut lam, mut tortoise) = (1u64, 0u64, v);
        let verdict = loop {
            if v == a128 {
                break YES;
            }
            if v.abs() <= xi {
                match fate[idx(v)] {
                    UNKNOWN => path.push(v),
                    f => break f,
                }
            }
            if steps == step_limit {
                return Err(Error::Domain {
                    map: "T".into(),
                    value: n.to_string(),
                    reason: format!("orbit unresolved after {step_limit} steps"),
                });
            }
            v = t_step(v);
            steps += 1;
            if v.abs() > 1 << 120 {
                return Err(Error::Domain {
                    map: "T".into(),
                    value: n.to_string(),
                    reason: "orbit left the 120-bit range".into(),
                });
            }
            if v == tortoise {
                break NO;
            }
            lam += 1;
            if lam == power {
                tortoise = v;
                power *= 2;
                lam = 0;
            }
        };
        for &p in &path {
            fate[idx(p)] = verdict;
        }
        if verdict == YES {
            forward += path.len() as u64;
        }
    }
    let count = fate.iter().filter(|&&f| f == YES).count() as u64;
    debug_assert_eq!(count, backward + forward);
    Ok(PiReport {
        a,
        x,
        count,
        by_backward_search: backward,
        by_forward_iteration: forward,
    })
}

/// The odd-to-odd map `g(t) = (3t+1)/2^v` with `v` maximal.
pub fn syracuse(t: i128) -> Result<i128> {
    if t & 1 == 0 {
        return Err(Error::usage("odd map needs an odd argument"));
    }
    let y = 3 * t + 1;
    if y == 0 {
        return Ok(0);
    }
    Ok(y >> y.trailing_zeros())
}

/// Canonical odd preimage under `g`: `6m+1 -> 8m+1`, `6m+5 -> 4m+3`, none for multiples of 3.
pub fn odd_preimage(n: i128) -> Result<Option<i128>> {
    if n & 1 == 0 {
        return Err(Error::usage("odd preimage needs an odd argument"));
    }
    let m = n.div_euclid(6);
    Ok(match n.rem_euclid(6) {
        1 => Some(8 * m + 1),
        5 => Some(4 * m + 3),
        _ => None,
    })
}

/// All odd `t` in `[1, bound]` with `g(t) = n`: the canonical preimage closed under `t -> 4t+1`.
pub fn odd_preimage_family(n: i128, bound: i128) -> Result<Vec<i128>> {
    let mut out = Vec::new();
    let Some(mut t) = odd_preimage(n)? else {
        return Ok(out);
    };
    if t < 1 {
        return Ok(out);
    }
    while t <= bound {
        out.push(t);
        t = 4 * t + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preimage_sets() {
        assert_eq!(preimages(5), [10, 3]);
        assert_eq!(preimages(4), [8]);
        assert_eq!(preimages(8), [16, 5]);
        assert_eq!(preimages(2), [4, 1]);
        assert_eq!(preimages(-1), [-2, -1]);
    }

    #[test]
    fn small_trees() {
        let t = tree_counts(5, 2, TreeMode::Full).unwrap();
        assert_eq!(t.counts, [1, 2, 2]);
        assert_eq!(t.levels.as_ref().unwrap()[2], [6, 20]);
        let t = tree_counts(3, 25, TreeMode::Counts).unwrap();
        assert!(t.counts.iter().all(|&c| c == 1));
        assert!(tree_counts(1, 31, TreeMode::Full).is_err());
        assert!(tree_counts(1, 41, TreeMode::Counts).is_err());
    }

    #[test]
    fn root_one_keeps_the_cycle_edge() {
        let t = tree_counts(1, 3, TreeMode::Full).unwrap();
        let levels = t.levels.unwrap();
        assert_eq!(levels[1], [2]);
        assert_eq!(levels[2], [1, 4]);
        assert_eq!(levels[3], [2, 8]);
    }

    #[test]
    fn levels_replay_to_root() {
        for a in 1..=100i128 {
            let t = tree_counts(a, 12, TreeMode::Full).unwrap();
            for (j, level) in t.levels.as_ref().unwrap().iter().enumerate() {
                for &v in level {
                    let mut w = v;
                    for _ in 0..j {
                        w = t_step(w);
                    }
                    assert_eq!(w, a);
                }
            }
            assert_eq!(t.counts, tree_counts(a, 12, TreeMode::Counts).unwrap().counts);
        }
    }

    #[test]
    fn edges() {
        let t = tree_counts(5, 2, TreeMode::Full).unwrap();
        assert_eq!(t.edge_list().unwrap(), "3\t5\n10\t5\n6\t3\n20\t10\n");
        assert!(tree_counts(5, 2, TreeMode::Counts).unwrap().edge_list().is_none());
    }

    #[test]
    fn depth_one_spread() {
        for a in 1..200u64 {
            let c = leaf_count(a as i128, 1).unwrap();
            assert_eq!(c, if a % 3 == 2 { 2 } else { 1 });
        }
    }

    #[test]
    fn spread_mean_at_depth_ten() {
        let r = extremal_spread(10, 1, 1000, Some(2)).unwrap();
        assert!((r.mean_ratio - 1.0).abs() < 0.15, "{}", r.mean_ratio);
        assert_eq!(r.unit_roots, 667);
        assert_eq!(r.classes.len(), 6);
    }

    #[test]
    fn pi_small() {
        assert_eq!(pi_count(1, 100, 10_000).unwrap().count, 100);
        assert_eq!(pi_count(1, 1, 10_000).unwrap().count, 1);
        let r = pi_count(-5, 50, 10_000).unwrap();
        let forward = (-50i128..=50)
            .filter(|&n| {
                let mut v = n;
                (0..1000).any(|_| {
                    let hit = v == -5;
                    v = t_step(v);
                    hit
                })
            })
            .count() as u64;
        assert_eq!(r.count, forward);
        assert!(r.count > 3);
    }

    #[test]
    fn banerji() {
        assert_eq!(odd_preimage(7).unwrap(), Some(9));
        assert_eq!(syracuse(9).unwrap(), 7);
        assert_eq!(odd_preimage(11).unwrap(), Some(7));
        assert_eq!(syracuse(7).unwrap(), 11);
        assert_eq!(odd_preimage(9).unwrap(), None);
        assert!(odd_preimage(4).is_err());
    }

    #[test]
    fn banerji_closure_small() {
        let bound = 20_000i128;
        let mut by_image: BTreeMap<i128, Vec<i128>> = BTreeMap::new();
        for t in (1..=bound).step_by(2) {
            by_image.entry(syracuse(t).unwrap()).or_default().push(t);
        }
        for n in (1..=2001i128).step_by(2) {
            let fam = odd_preimage_family(n, bound).unwrap();
            assert_eq!(fam, by_image.get(&n).cloned().unwrap_or_default(), "n={n}");
            if let Some(t) = fam.first() {
                assert_ne!(t % 8, 5);
            }
        }
    }
}
