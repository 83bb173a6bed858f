//! Plain bitstrings over `{0,1}^n`.
//!
//! Position 0 is the leftmost character of the ASCII form and the most
//! significant bit of the integer value.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        BitString(vec![true; len])
    }

    /// Big-endian `len`-bit encoding of `value`. Bits above `len` are dropped.
    pub fn from_value(value: u128, len: usize) -> Self {
        let bits = (0..len)
            .map(|i| {
                let shift = len - 1 - i;
                shift < 128 && (value >> shift) & 1 == 1
            })
            .collect();
        BitString(bits)
    }

    /// Big-endian integer value. Panics if the string is longer than 128 bits
    /// and has a set bit beyond that range.
    pub fn value(&self) -> u128 {
        let len = self.0.len();
        self.0.iter().enumerate().fold(0u128, |acc, (i, &b)| {
            if b {
                let shift = len - 1 - i;
                assert!(shift < 128, "bitstring value exceeds 128 bits");
                acc | (1u128 << shift)
            } else {
                acc
            }
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Parity of `self · other` over GF(2): `true` when odd.
    pub fn dot_parity(&self, other: &BitString) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(false, |acc, (&a, &b)| acc ^ (a & b))
    }

    /// `(-1)^{self · other}` as a float.
    pub fn character(&self, other: &BitString) -> f64 {
        if self.dot_parity(other) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BitString(bits)
    }

    /// All `2^len` bitstrings in increasing integer order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "cannot enumerate 2^{len} bitstrings");
        (0..1u128 << len).map(move |v| BitString::from_value(v, len))
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
                other => Err(Error::InvalidOutcome(format!(
                    "unexpected character {other:?} in bitstring {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_round_trip() {
        let b: BitString = "1011".parse().unwrap();
        assert_eq!(b.value(), 11);
        assert_eq!(BitString::from_value(11, 4), b);
        assert_eq!(BitString::from_value(11, 3).to_string(), "011");
    }

    #[test]
    fn parity_and_distance() {
        let a: BitString = "1100".parse().unwrap();
        let b: BitString = "1010".parse().unwrap();
        assert_eq!(a.hamming(&b), 2);
        assert!(a.dot_parity(&b));
        assert!(!a.dot_parity(&"0011".parse().unwrap()));
        assert_eq!(a.character(&"1000".parse().unwrap()), -1.0);
    }

    #[test]
    fn rejects_bad_chars() {
        assert!("10x1".parse::<BitString>().is_err());
    }
}
