//! Integer values with a 128-bit fast path and transparent promotion.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// An exact integer, kept as `i128` whenever it fits.
///
/// The representation is normalized (`Big` only holds values outside the
/// `i128` range), so derived equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Num {
    Small(i128),
    Big(BigInt),
}

impl Num {
    pub fn from_big(b: BigInt) -> Num {
        match b.to_i128() {
            Some(v) => Num::Small(v),
            None => Num::Big(b),
        }
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Num::Small(v) => BigInt::from(*v),
            Num::Big(b) => b.clone(),
        }
    }

    pub fn as_small(&self) -> Option<i128> {
        match self {
            Num::Small(v) => Some(*v),
            Num::Big(_) => None,
        }
    }

    /// Number of bits of `|x|`.
    pub fn bits(&self) -> u64 {
        match self {
            Num::Small(v) => 128 - v.unsigned_abs().leading_zeros() as u64,
            Num::Big(b) => b.bits(),
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Num::Small(v) => v & 1 != 0,
            Num::Big(b) => b.bit(0),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Small(v) => *v < 0,
            Num::Big(b) => b.is_negative(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Small(v) => *v == 0,
            Num::Big(b) => b.is_zero(),
        }
    }

    /// Mathematical residue in `[0, m)`.
    pub fn rem_euclid(&self, m: u64) -> u64 {
        match self {
            Num::Small(v) => v.rem_euclid(m as i128) as u64,
            Num::Big(b) => {
                let r = b % BigInt::from(m);
                let r = if r.is_negative() { r + BigInt::from(m) } else { r };
                r.to_u64().expect("residue fits")
            }
        }
    }
}

impl From<i128> for Num {
    fn from(v: i128) -> Self {
        Num::Small(v)
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::Small(v as i128)
    }
}

impl From<BigInt> for Num {
    fn from(v: BigInt) -> Self {
        Num::from_big(v)
    }
}

impl From<&BigInt> for Num {
    fn from(v: &BigInt) -> Self {
        Num::from_big(v.clone())
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Num::Small(a), Num::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Small(v) => write!(f, "{v}"),
            Num::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
