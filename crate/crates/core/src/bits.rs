//! Bitstrings over the binary variables of a QUBO.
//!
//! Character `u` of the textual form is variable `u`; as an integer index
//! variable `u` is bit `u` (so `"1000"` is index 1).

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn from_index(index: u64, n: usize) -> Self {
        BitString((0..n).map(|u| (index >> u) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (u, _)| acc | (1 << u))
    }

    pub fn flipped(&self, u: usize) -> Self {
        let mut out = self.clone();
        out.0[u] = !out.0[u];
        out
    }

    pub fn flip(&mut self, u: usize) {
        self.0[u] = !self.0[u];
    }

    pub fn set(&mut self, u: usize, value: bool) {
        self.0[u] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }
}

impl Deref for BitString {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected character {other:?} in bitstring"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_uses_first_character_as_lowest_bit() {
        let b: BitString = "1000".parse().unwrap();
        assert_eq!(b.to_index(), 1);
        assert_eq!(BitString::from_index(6, 4).to_string(), "0110");
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..64 {
            assert_eq!(BitString::from_index(idx, 6).to_index(), idx);
        }
    }

    #[test]
    fn rejects_bad_characters() {
        assert!("10x1".parse::<BitString>().is_err());
    }
}
