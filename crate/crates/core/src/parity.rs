//! Parity words: the 0/1 record of which iterates were odd.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite 0/1 word, bit `i` being the parity of the `i`-th iterate.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityVector {
    words: Vec<u64>,
    len: usize,
}

impl ParityVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        ParityVector {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut pv = ParityVector::new();
        for b in bits {
            pv.push(b);
        }
        pv
    }

    /// Word of length `len` with ones exactly at `positions`.
    pub fn from_ones(len: usize, positions: &[usize]) -> Self {
        let mut pv = ParityVector {
            words: vec![0; len.div_ceil(64)],
            len,
        };
        for &p in positions {
            assert!(p < len, "position {p} outside word of length {len}");
            pv.words[p / 64] |= 1 << (p % 64);
        }
        pv
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the ones, ascending.
    pub fn one_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    pub fn prefix(&self, n: usize) -> ParityVector {
        ParityVector::from_bits(self.iter().take(n))
    }

    /// Cyclic rotation starting at position `k`.
    pub fn rotate(&self, k: usize) -> ParityVector {
        let n = self.len;
        ParityVector::from_bits((0..n).map(|i| self.get((i + k) % n)))
    }

    /// Lowest `n` bits as an integer, bit `i` = parity of iterate `i`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Display for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ParityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParityVector({self})")
    }
}

impl FromStr for ParityVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pv = ParityVector::new();
        for (i, c) in s.trim().chars().enumerate() {
            match c {
                '0' => pv.push(false),
                '1' => pv.push(true),
                _ => {
                    return Err(Error::Syntax {
                        position: i,
                        message: format!("parity words use only 0 and 1, found {c:?}"),
                    })
                }
            }
        }
        Ok(pv)
    }
}

impl Serialize for ParityVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParityVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_text() {
        let pv: ParityVector = "1101000".parse().unwrap();
        assert_eq!(pv.len(), 7);
        assert_eq!(pv.ones(), 3);
        assert_eq!(pv.to_string(), "1101000");
        assert_eq!(pv.one_positions(), vec![0, 1, 3]);
        assert_eq!(pv.rotate(3).to_string(), "1000110");
        assert!("10a".parse::<ParityVector>().is_err());
    }

    #[test]
    fn long_words_cross_word_boundaries() {
        let pv = ParityVector::from_ones(200, &[0, 63, 64, 199]);
        assert_eq!(pv.ones(), 4);
        assert!(pv.get(64) && pv.get(199) && !pv.get(100));
    }
}
