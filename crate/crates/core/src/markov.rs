//! Markov chains on residue classes induced by residue-affine maps.
//!
//! For a map with modulus `d` and an auxiliary modulus `m`, the image of `x` mod `m`
//! depends only on `x mod md`. Row `j` of the matrix is the distribution of `T(x) mod m`
//! over the `d` classes mod `md` lying above `j`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::bigmath::rat_string;
use crate::error::{Error, Result};
use crate::maps::{AffineMap, MapSpec, Num};

pub const MAX_MODULUS: u64 = 4096;
/// Classes up to this size get an exact rational stationary vector.
pub const EXACT_CLASS_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub modulus: u64,
    pub divisor: u64,
    pub entries: Vec<Vec<BigRational>>,
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            modulus: u64,
            divisor: u64,
            entries: Rows<'a>,
        }
        struct Rows<'a>(&'a [Vec<BigRational>]);
        impl Serialize for Rows<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for row in self.0 {
                    let r: Vec<String> = row.iter().map(rat_string).collect();
                    seq.serialize_element(&r)?;
                }
                seq.end()
            }
        }
        Out {
            modulus: self.modulus,
            divisor: self.divisor,
            entries: Rows(&self.entries),
        }
        .serialize(s)
    }
}

fn affine_of(map: &MapSpec) -> Result<&AffineMap> {
    map.as_affine()
        .ok_or_else(|| Error::usage(format!("map `{}` is not residue-affine", map.name)))
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// Exact product.
    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let n = self.size();
        let entries = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut acc = BigRational::zero();
                        for k in 0..n {
                            if !self.entries[i][k].is_zero() && !other.entries[k][j].is_zero() {
                                acc += &self.entries[i][k] * &other.entries[k][j];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        TransitionMatrix {
            modulus: self.modulus,
            divisor: self.divisor,
            entries,
        }
    }

    pub fn pow(&self, e: u32) -> TransitionMatrix {
        let mut out = self.clone();
        for _ in 1..e.max(1) {
            out = out.mul(self);
        }
        out
    }

    /// Every entry equals `1/m`.
    pub fn is_uniform(&self) -> bool {
        let u = BigRational::new(BigInt::one(), BigInt::from(self.modulus));
        self.entries.iter().flatten().all(|q| *q == u)
    }

    pub fn row_sums_are_one(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().fold(BigRational::zero(), |a, b| a + b).is_one())
    }

    /// Closed communicating classes and the transient states, both sorted.
    pub fn classes(&self) -> (Vec<Vec<u64>>, Vec<u64>) {
        let n = self.size();
        let mut g = DiGraph::<(), ()>::with_capacity(n, n * 2);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                if !q.is_zero() {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut closed = Vec::new();
        let mut transient = Vec::new();
        for scc in tarjan_scc(&g) {
            let mut members: Vec<u64> = scc.iter().map(|v| v.index() as u64).collect();
            members.sort_unstable();
            let inside = |j: usize| members.binary_search(&(j as u64)).is_ok();
            let shut = members
                .iter()
                .all(|&i| self.entries[i as usize].iter().enumerate().all(|(j, q)| q.is_zero() || inside(j)));
            if shut {
                closed.push(members);
            } else {
                transient.extend(members);
            }
        }
        closed.sort();
        transient.sort_unstable();
        (closed, transient)
    }
}

/// The matrix `q_jk` of `map` on residues mod `m`.
pub fn transition_matrix(map: &MapSpec, m: u64) -> Result<TransitionMatrix> {
    let a = affine_of(map)?;
    if !(2..=MAX_MODULUS).contains(&m) {
        return Err(Error::usage(format!("auxiliary modulus must be in 2..={MAX_MODULUS}")));
    }
    let d = a.modulus;
    if m.checked_mul(d).is_none_or(|md| md > 1 << 24) {
        return Err(Error::usage("m * d is too large"));
    }
    let unit = BigRational::new(BigInt::one(), BigInt::from(d));
    let entries = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![BigRational::zero(); m as usize];
            for t in 0..d {
                let r = j + t * m;
                let k = a.step(&Num::Small(r as i128)).rem_euclid(m);
                row[k as usize] += &unit;
            }
            row
        })
        .collect();
    Ok(TransitionMatrix {
        modulus: m,
        divisor: d,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ExpectedConvergent,
    ExpectedDivergent,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub members: Vec<u64>,
    /// Exact stationary vector, present for classes of at most 64 states.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rats")]
    pub stationary_exact: Option<Vec<BigRational>>,
    pub stationary: Vec<f64>,
    /// `max_k |(alpha Q)_k - alpha_k|`.
    pub residual: f64,
    pub log_growth: f64,
    pub growth_constant: f64,
    pub classification: Classification,
}

fn ser_opt_rats<S: Serializer>(v: &Option<Vec<BigRational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(rat_string)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovAnalysis {
    pub map: String,
    pub modulus: u64,
    pub divisor: u64,
    pub classes: Vec<ErgodicReport>,
    /// States that lead out of their communicating class; not analysed.
    pub transient: Vec<u64>,
}

/// Solve `alpha Q = alpha`, `sum alpha = 1` on one closed class, exactly.
fn stationary_exact(q: &TransitionMatrix, members: &[u64]) -> Vec<BigRational> {
    let n = members.len();
    // Unknowns alpha_0..alpha_{n-1}; equation i: sum_j alpha_j q_{j i} - alpha_i = 0,
    // with the last one replaced by the normalization.
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| q.entries[members[j] as usize][members[i] as usize].clone())
                .collect();
            row[i] -= BigRational::one();
            row.push(BigRational::zero());
            row
        })
        .collect();
    a[n - 1] = vec![BigRational::one(); n + 1];
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).expect("stationary system is nonsingular");
        a.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n].clone()).collect()
}

/// Power iteration on the lazy chain `(Q + I)/2`, which has the same stationary vector.
fn stationary_float(q: &TransitionMatrix, members: &[u64]) -> Vec<f64> {
    let n = members.len();
    let sub: Vec<Vec<f64>> = members
        .iter()
        .map(|&i| members.iter().map(|&j| q.entries[i as usize][j as usize].to_f64().unwrap_or(0.0)).collect())
        .collect();
    let mut alpha = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, row) in sub.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                next[j] += alpha[i] * p;
            }
        }
        let mut change = 0.0f64;
        for j in 0..n {
            let v = 0.5 * (next[j] + alpha[j]);
            change = change.max((v - alpha[j]).abs());
            alpha[j] = v;
        }
        if change < 1e-15 {
            break;
        }
    }
    let s: f64 = alpha.iter().sum();
    alpha.iter().map(|x| x / s).collect()
}

/// `(1/d) sum ln|mul|` over the `d` lifts of class `j` mod `md`.
fn class_log_multiplier(a: &AffineMap, m: u64, j: u64) -> Result<f64> {
    let d = a.modulus;
    let mut s = 0.0;
    for t in 0..d {
        let b = &a.branches[((j + t * m) % d) as usize];
        if b.mul.is_zero() {
            return Err(Error::usage("growth constant needs nonzero multipliers"));
        }
        s += ln_rat(&b.mul.abs());
    }
    Ok(s / d as f64)
}

fn ln_rat(q: &BigRational) -> f64 {
    let ln = |b: &BigInt| {
        let bits = b.bits();
        let shift = bits.saturating_sub(60);
        (b >> shift).to_f64().expect("60 bits fit").ln() + shift as f64 * std::f64::consts::LN_2
    };
    ln(q.numer()) - ln(q.denom())
}

/// Ergodic decomposition, stationary vectors and growth constants of `map` mod `m`.
pub fn analyze(map: &MapSpec, m: u64) -> Result<MarkovAnalysis> {
    let a = affine_of(map)?;
    let q = transition_matrix(map, m)?;
    let (closed, transient) = q.classes();
    let mut classes = Vec::with_capacity(closed.len());
    for members in closed {
        let (exact, alpha) = if members.len() <= EXACT_CLASS_LIMIT {
            let ex = stationary_exact(&q, &members);
            let fl = ex.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
            (Some(ex), fl)
        } else {
            (None, stationary_float(&q, &members))
        };
        let residual = match &exact {
            Some(ex) => {
                // exact check of alpha Q = alpha
                let ok = members.iter().enumerate().all(|(k, &mk)| {
                    let s = members
                        .iter()
                        .enumerate()
                        .fold(BigRational::zero(), |acc, (j, &mj)| acc + &ex[j] * &q.entries[mj as usize][mk as usize]);
                    s == ex[k]
                });
                if !ok {
                    return Err(Error::falsified("exact stationary vector", format!("{members:?}")));
                }
                0.0
            }
            None => members
                .iter()
                .enumerate()
                .map(|(k, &mk)| {
                    let s: f64 = members
                        .iter()
                        .enumerate()
                        .map(|(j, &mj)| alpha[j] * q.entries[mj as usize][mk as usize].to_f64().unwrap_or(0.0))
                        .sum();
                    (s - alpha[k]).abs()
                })
                .fold(0.0, f64::max),
        };
        let mut log_growth = 0.0;
        for (i, &j) in members.iter().enumerate() {
            log_growth += alpha[i] * class_log_multiplier(a, m, j)?;
        }
        let classification = if log_growth.abs() < 1e-12 {
            Classification::Critical
        } else if log_growth < 0.0 {
            Classification::ExpectedConvergent
        } else {
            Classification::ExpectedDivergent
        };
        classes.push(ErgodicReport {
            members,
            stationary_exact: exact,
            stationary: alpha,
            residual,
            log_growth,
            growth_constant: log_growth.exp(),
            classification,
        });
    }
    Ok(MarkovAnalysis {
        map: map.name.clone(),
        modulus: m,
        divisor: q.divisor,
        classes,
        transient,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSample {
    pub trials: u64,
    pub steps: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Mean of `(ln|x_steps| - ln|x_0|)/steps` over random starts of `start_bits` bits.
pub fn sample_log_growth(map: &MapSpec, trials: u64, steps: u64, start_bits: u32, seed: u64) -> Result<GrowthSample> {
    affine_of(map)?;
    if trials < 2 || steps == 0 || !(8..=120).contains(&start_bits) {
        return Err(Error::usage("need trials >= 2, steps >= 1 and 8 <= start_bits <= 120"));
    }
    const BLOCK: u64 = 1024;
    let blocks = trials.div_ceil(BLOCK);
    let per: Vec<Result<Vec<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(trials - b * BLOCK);
            let mut out = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let x0: u128 = rng.gen::<u128>() >> (128 - start_bits) | 1 << (start_bits - 1);
                let mut x = Num::Small(x0 as i128);
                for _ in 0..steps {
                    x = map.step(&x)?;
                }
                if x.is_zero() {
                    return Err(Error::Domain {
                        map: map.name.clone(),
                        value: x0.to_string(),
                        reason: "trajectory reached 0".into(),
                    });
                }
                let lx = ln_rat(&BigRational::from_integer(x.to_big().abs()));
                out.push((lx - (x0 as f64).ln()) / steps as f64);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(trials as usize);
    for p in per {
        all.extend(p?);
    }
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(GrowthSample {
        trials,
        steps,
        mean,
        std_error: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigmath::rat;
    use crate::maps::builtin;
    use crate::maps::parse_map;

    #[test]
    fn t_mod_2() {
        let q = transition_matrix(&builtin::t(), 2).unwrap();
        assert!(q.entries.iter().flatten().all(|x| *x == rat(1, 2)));
        let r = analyze(&builtin::t(), 2).unwrap();
        assert_eq!(r.classes.len(), 1);
        let c = &r.classes[0];
        assert_eq!(c.stationary_exact.as_ref().unwrap(), &vec![rat(1, 2), rat(1, 2)]);
        assert!((c.growth_constant.powi(2) - 0.75).abs() < 1e-12);
        assert_eq!(c.classification, Classification::ExpectedConvergent);
    }

    #[test]
    fn feix_identity() {
        for k in 1..=5u32 {
            let q = transition_matrix(&builtin::t(), 1 << k).unwrap();
            assert!(q.row_sums_are_one());
            assert!(q.pow(k).is_uniform(), "k={k}");
            if k > 1 {
                assert!(!q.pow(k - 1).is_uniform());
            }
        }
    }

    #[test]
    fn venturini_mod_10() {
        let r = analyze(&builtin::venturini(), 10).unwrap();
        // the classes prime to 5 form a second closed set
        assert_eq!(r.classes.len(), 2);
        let c = r.classes.iter().find(|c| c.members == [0, 5]).unwrap();
        assert_eq!(c.stationary_exact.as_ref().unwrap(), &vec![rat(1, 3), rat(2, 3)]);
        assert!((c.growth_constant - 1.0583).abs() < 1e-4, "{}", c.growth_constant);
        assert_eq!(c.classification, Classification::ExpectedDivergent);
    }

    #[test]
    fn five_x_plus_one_diverges() {
        let m = builtin::qx_plus_1(5).unwrap();
        let r = analyze(&m, 2).unwrap();
        let c = &r.classes[0];
        assert!((c.growth_constant - 5f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(c.classification, Classification::ExpectedDivergent);
        let s = sample_log_growth(&m, 4000, 100, 64, 7).unwrap();
        assert!((s.mean - c.log_growth).abs() < 3.0 * s.std_error + 1e-3, "{s:?}");
    }

    #[test]
    fn buttsworth_matthews_mod_30() {
        let m = parse_map("d=2; 0: x/2; 1: (5x-3)/2").unwrap();
        let r = analyze(&m, 30).unwrap();
        let coprime: Vec<u64> = (0..30).filter(|n| n % 3 != 0 && n % 5 != 0).collect();
        assert!(r.classes.iter().any(|c| c.members == coprime), "{:?}", r.classes);
        for c in &r.classes {
            assert!((c.stationary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn float_path_agrees() {
        let q = transition_matrix(&builtin::t(), 8).unwrap();
        let members: Vec<u64> = (0..8).collect();
        let ex = stationary_exact(&q, &members);
        let fl = stationary_float(&q, &members);
        for (a, b) in ex.iter().zip(&fl) {
            assert!((a.to_f64().unwrap() - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_named_maps() {
        assert!(transition_matrix(&builtin::teriele(), 4).is_err());
        assert!(transition_matrix(&builtin::t(), 1).is_err());
    }
}
