use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::num::Num;
use crate::bigmath::rat_string;
use crate::error::{Error, Result};

/// One residue branch `x -> (num * x + off) / den`, with `den > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub mul: BigRational,
    pub add: BigRational,
    num: BigInt,
    off: BigInt,
    den: BigInt,
    small: Option<(i128, i128, i128)>,
}

impl Branch {
    pub fn new(mul: BigRational, add: BigRational) -> Branch {
        let den = mul.denom().lcm(add.denom());
        let num = mul.numer() * (&den / mul.denom());
        let off = add.numer() * (&den / add.denom());
        let small = match (num.to_i128(), off.to_i128(), den.to_i128()) {
            (Some(a), Some(b), Some(c)) if a.unsigned_abs() < 1 << 60 && b.unsigned_abs() < 1 << 60 => {
                Some((a, b, c))
            }
            _ => None,
        };
        Branch {
            mul,
            add,
            num,
            off,
            den,
            small,
        }
    }

    pub fn from_ints(num: i64, off: i64, den: i64) -> Branch {
        Branch::new(
            BigRational::new(num.into(), den.into()),
            BigRational::new(off.into(), den.into()),
        )
    }

    /// Numerator multiplier `m` in the form `(m x + r) / d`.
    pub fn numerator_multiplier(&self) -> &BigInt {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    fn apply_small(&self, x: i128) -> Option<i128> {
        let (a, b, d) = self.small?;
        let v = a.checked_mul(x)?.checked_add(b)?;
        debug_assert_eq!(v % d, 0);
        Some(v / d)
    }

    fn apply_big(&self, x: &BigInt) -> BigInt {
        let v = &self.num * x + &self.off;
        debug_assert!((&v % &self.den).is_zero());
        v / &self.den
    }

    pub fn apply(&self, x: &Num) -> Num {
        if let Num::Small(v) = x {
            if let Some(r) = self.apply_small(*v) {
                return Num::Small(r);
            }
        }
        Num::from_big(self.apply_big(&x.to_big()))
    }

    pub fn is_pure_multiplier(&self) -> bool {
        self.add.is_zero()
    }

    fn display(&self) -> String {
        let m = rat_string(&self.mul);
        let coeff = if self.mul.is_one() {
            String::new()
        } else if self.mul.denom().is_one() {
            m
        } else {
            format!("{m}*")
        };
        if self.add.is_zero() {
            format!("{coeff}x")
        } else if self.add.is_negative() {
            format!("{coeff}x-{}", rat_string(&-&self.add))
        } else {
            format!("{coeff}x+{}", rat_string(&self.add))
        }
    }
}

/// `x -> branch[x mod d](x)` with mathematical residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub modulus: u64,
    pub branches: Vec<Branch>,
}

impl AffineMap {
    /// Validates the modulus and the integrality of every branch.
    pub fn new(modulus: u64, branches: Vec<Branch>) -> Result<AffineMap> {
        if modulus < 2 {
            return Err(Error::usage(format!("modulus must be at least 2, got {modulus}")));
        }
        if branches.len() as u64 != modulus {
            return Err(Error::usage(format!(
                "{} branches given for modulus {modulus}",
                branches.len()
            )));
        }
        let d = BigInt::from(modulus);
        for (i, b) in branches.iter().enumerate() {
            if !(&d % b.mul.denom()).is_zero() {
                return Err(Error::Integrality {
                    residue: i as u64,
                    detail: format!(
                        "multiplier {} has denominator not dividing {modulus}",
                        rat_string(&b.mul)
                    ),
                });
            }
            let at_residue = &b.mul * BigInt::from(i) + &b.add;
            if !at_residue.denom().is_one() {
                return Err(Error::Integrality {
                    residue: i as u64,
                    detail: format!("image of {i} is {}", rat_string(&at_residue)),
                });
            }
        }
        Ok(AffineMap { modulus, branches })
    }

    pub fn branch_for(&self, x: &Num) -> &Branch {
        &self.branches[x.rem_euclid(self.modulus) as usize]
    }

    pub fn step(&self, x: &Num) -> Num {
        self.branch_for(x).apply(x)
    }

    pub fn to_dsl(&self) -> String {
        let mut s = format!("d={}", self.modulus);
        for (i, b) in self.branches.iter().enumerate() {
            s.push_str(&format!("; {i}: {}", b.display()));
        }
        s
    }
}

/// Multiplier `beta` of the Mignosi map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Beta {
    /// Exact rational value.
    Rational(#[serde(with = "crate::report::rational")] BigRational),
    /// `sqrt(r)` for a non-square positive integer `r`, evaluated exactly.
    Sqrt(u64),
    /// A real known only to lie within `value ± radius`.
    Interval {
        #[serde(with = "crate::report::rational")]
        value: BigRational,
        #[serde(with = "crate::report::rational")]
        radius: BigRational,
    },
}

impl Beta {
    /// Parse `p/q`, `sqrt(r)`, or a decimal string such as `1.4142135623`.
    /// A decimal with `k` fraction digits is read as an enclosure of radius `10^-k`.
    pub fn parse(s: &str) -> Result<Beta> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let r: u64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::usage(format!("bad radicand in {s:?}")))?;
            let root = r.sqrt();
            if root * root == r {
                return Ok(Beta::Rational(BigRational::from_integer(root.into())));
            }
            return Ok(Beta::Sqrt(r));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            let digits = fp.len() as u32;
            let num: BigInt = format!("{ip}{fp}")
                .parse()
                .map_err(|_| Error::usage(format!("bad decimal {s:?}")))?;
            let scale = num_traits::pow::pow(BigInt::from(10), digits as usize);
            return Ok(Beta::Interval {
                value: BigRational::new(num, scale.clone()),
                radius: BigRational::new(BigInt::one(), scale),
            });
        }
        crate::bigmath::parse_rat(s)
            .map(Beta::Rational)
            .ok_or_else(|| Error::usage(format!("bad beta {s:?}")))
    }

    /// `ceil(beta * n)` for `n >= 1`, or `None` when an interval value
    /// cannot decide the ceiling.
    pub fn ceil_times(&self, n: &BigInt) -> Option<BigInt> {
        match self {
            Beta::Rational(b) => Some((b * n).ceil().to_integer()),
            Beta::Sqrt(r) => {
                // ceil(n sqrt r) = isqrt(r n^2 - 1) + 1 for irrational sqrt r.
                let sq = n * n * BigInt::from(*r);
                Some((sq - 1u32).sqrt() + 1u32)
            }
            Beta::Interval { value, radius } => {
                let lo = ((value - radius) * n).ceil().to_integer();
                let hi = ((value + radius) * n).ceil().to_integer();
                // Exact hits on an integer at the lower end are ambiguous too.
                if lo == hi && ((value - radius) * n).ceil() != (value - radius) * n {
                    Some(lo)
                } else {
                    None
                }
            }
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Rational(b) => write!(f, "{}", rat_string(b)),
            Beta::Sqrt(r) => write!(f, "sqrt({r})"),
            Beta::Interval { value, radius } => {
                write!(f, "{}±{}", rat_string(value), rat_string(radius))
            }
        }
    }
}

/// Maps that are not residue-affine on all of their domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedMap {
    /// `ceil(beta n)` on odd `n`, `n/2` on even `n`, for `n >= 1`.
    BetaMap(Beta),
    /// `n/3` when `3 | n`, `floor(n sqrt 3)` otherwise, for `n >= 1`.
    TeRieleSqrt3,
    /// Spiral permutation of `{1..n}`.
    QueneauSpiral(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapKind {
    ResidueAffine(AffineMap),
    Named(NamedMap),
}

/// An integer self-map together with the text it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSpec {
    pub name: String,
    pub kind: MapKind,
}

impl MapSpec {
    pub fn affine(name: impl Into<String>, map: AffineMap) -> MapSpec {
        MapSpec {
            name: name.into(),
            kind: MapKind::ResidueAffine(map),
        }
    }

    pub fn named(name: impl Into<String>, map: NamedMap) -> MapSpec {
        MapSpec {
            name: name.into(),
            kind: MapKind::Named(map),
        }
    }

    pub fn as_affine(&self) -> Option<&AffineMap> {
        match &self.kind {
            MapKind::ResidueAffine(a) => Some(a),
            MapKind::Named(NamedMap::QueneauSpiral(_)) | MapKind::Named(_) => None,
        }
    }

    fn domain_error(&self, x: &Num, reason: &str) -> Error {
        Error::Domain {
            map: self.name.clone(),
            value: x.to_string(),
            reason: reason.to_string(),
        }
    }

    /// One application of the map.
    pub fn step(&self, x: &Num) -> Result<Num> {
        match &self.kind {
            MapKind::ResidueAffine(a) => Ok(a.step(x)),
            MapKind::Named(NamedMap::TeRieleSqrt3) => {
                if x.is_negative() || x.is_zero() {
                    return Err(self.domain_error(x, "requires x >= 1"));
                }
                if x.rem_euclid(3) == 0 {
                    return Ok(match x {
                        Num::Small(v) => Num::Small(v / 3),
                        Num::Big(b) => Num::from_big(b / 3u32),
                    });
                }
                if let Num::Small(v) = x {
                    if *v < 1 << 62 {
                        let sq = 3 * (*v as u128) * (*v as u128);
                        return Ok(Num::Small(sq.sqrt() as i128));
                    }
                }
                let b = x.to_big();
                Ok(Num::from_big((&b * &b * 3u32).sqrt()))
            }
            MapKind::Named(NamedMap::BetaMap(beta)) => {
                if x.is_negative() || x.is_zero() {
                    return Err(self.domain_error(x, "requires x >= 1"));
                }
                if !x.is_odd() {
                    return Ok(match x {
                        Num::Small(v) => Num::Small(v / 2),
                        Num::Big(b) => Num::from_big(b >> 1usize),
                    });
                }
                beta.ceil_times(&x.to_big())
                    .map(Num::from_big)
                    .ok_or_else(|| self.domain_error(x, "beta precision cannot decide the ceiling"))
            }
            MapKind::Named(NamedMap::QueneauSpiral(n)) => {
                let v = x
                    .as_small()
                    .filter(|v| *v >= 1 && *v <= *n as i128)
                    .ok_or_else(|| self.domain_error(x, &format!("requires 1 <= x <= {n}")))?;
                Ok(Num::Small(queneau_delta(*n as i128, v)))
            }
        }
    }

    pub fn step_i(&self, x: i128) -> Result<Num> {
        self.step(&Num::Small(x))
    }
}

pub(crate) fn queneau_delta(n: i128, x: i128) -> i128 {
    if x % 2 == 0 {
        x / 2
    } else {
        (2 * n + 1 - x) / 2
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Builtin maps by name.
pub mod builtin {
    use super::*;

    fn affine(name: &str, modulus: u64, branches: Vec<Branch>) -> MapSpec {
        MapSpec::affine(name, AffineMap::new(modulus, branches).expect("builtin maps are integral"))
    }

    /// The 3x+1 function `T`.
    pub fn t() -> MapSpec {
        affine("T", 2, vec![Branch::from_ints(1, 0, 2), Branch::from_ints(3, 1, 2)])
    }

    /// The Collatz function `C`.
    pub fn c() -> MapSpec {
        affine("C", 2, vec![Branch::from_ints(1, 0, 2), Branch::from_ints(3, 1, 1)])
    }

    /// `(3x + d)/2` on odd `x`, `x/2` on even `x`; `d` must be odd.
    pub fn three_x_plus(d: i64) -> Result<MapSpec> {
        qx_plus_r(3, d).map(|mut m| {
            m.name = format!("3x+d:{d}");
            m
        })
    }

    /// Crandall's `(qx + r)/2` map.
    pub fn qx_plus_r(q: i64, r: i64) -> Result<MapSpec> {
        let map = AffineMap::new(2, vec![Branch::from_ints(1, 0, 2), Branch::from_ints(q, r, 2)])?;
        Ok(MapSpec::affine(format!("qx+r:{q},{r}"), map))
    }

    pub fn qx_plus_1(q: i64) -> Result<MapSpec> {
        qx_plus_r(q, 1).map(|mut m| {
            m.name = format!("qx+1:{q}");
            m
        })
    }

    /// Hasse-class map: `x/d` on `0 mod d`, `(m x + r_j)/d` on `j mod d`.
    pub fn hasse(d: u64, m: i64, r: &[i64]) -> Result<MapSpec> {
        if r.len() as u64 + 1 != d {
            return Err(Error::usage(format!("hasse map with d={d} needs {} offsets", d - 1)));
        }
        let mut branches = vec![Branch::from_ints(1, 0, d as i64)];
        branches.extend(r.iter().map(|&rj| Branch::from_ints(m, rj, d as i64)));
        let map = AffineMap::new(d, branches)?;
        Ok(MapSpec::affine(format!("hasse:{d},{m},{r:?}"), map))
    }

    /// Wiggin's `F_D`.
    pub fn wiggin(d: u64) -> Result<MapSpec> {
        if d < 2 {
            return Err(Error::usage("wiggin map needs D >= 2"));
        }
        let di = d as i64;
        let mut branches = vec![Branch::from_ints(1, 0, di)];
        for j in 1..di - 1 {
            branches.push(Branch::from_ints(di + 1, -j, 1));
        }
        branches.push(Branch::from_ints(di + 1, 1, 1));
        let map = AffineMap::new(d, branches)?;
        Ok(MapSpec::affine(format!("wiggin:{d}"), map))
    }

    /// `f(3n) = 2n, f(3n-1) = 4n-1, f(3n-2) = 4n-3`.
    pub fn collatz_permutation() -> MapSpec {
        affine(
            "collatz-perm",
            3,
            vec![Branch::from_ints(2, 0, 3), Branch::from_ints(4, -1, 3), Branch::from_ints(4, 1, 3)],
        )
    }

    /// `f(3n) = 4n+3, f(3n+1) = 2n, f(3n+2) = 4n+1`.
    pub fn atkin_permutation() -> MapSpec {
        affine(
            "atkin-perm",
            3,
            vec![Branch::from_ints(4, 9, 3), Branch::from_ints(2, -2, 3), Branch::from_ints(4, -5, 3)],
        )
    }

    /// `g(3m) = 2m, g(3m+1) = 4m+3, g(3m+2) = 4m+1`.
    pub fn venturini() -> MapSpec {
        affine(
            "venturini",
            3,
            vec![Branch::from_ints(2, 0, 3), Branch::from_ints(4, 5, 3), Branch::from_ints(4, -5, 3)],
        )
    }

    /// `x/3`, `(2x+1)/3`, `(7x+1)/3` by residue mod 3.
    pub fn feix3() -> MapSpec {
        affine(
            "feix3",
            3,
            vec![Branch::from_ints(1, 0, 3), Branch::from_ints(2, 1, 3), Branch::from_ints(7, 1, 3)],
        )
    }

    /// Mahler's `3x/2` (even), `(3x+1)/2` (odd).
    pub fn mahler() -> MapSpec {
        affine("mahler", 2, vec![Branch::from_ints(3, 0, 2), Branch::from_ints(3, 1, 2)])
    }

    pub fn teriele() -> MapSpec {
        MapSpec::named("teriele", NamedMap::TeRieleSqrt3)
    }

    pub fn beta(b: Beta) -> MapSpec {
        MapSpec::named(format!("beta:{b}"), NamedMap::BetaMap(b))
    }

    pub fn queneau(n: u64) -> Result<MapSpec> {
        if n < 1 {
            return Err(Error::usage("queneau map needs n >= 1"));
        }
        Ok(MapSpec::named(format!("queneau:{n}"), NamedMap::QueneauSpiral(n)))
    }
}

#[allow(dead_code)]
fn biguint_to_bigint(u: BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, u)
}
