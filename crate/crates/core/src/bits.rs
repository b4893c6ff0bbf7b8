//! Finite bit strings and their length-lexicographic enumeration.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bit string {0:?}")]
pub struct ParseBitsError(pub String);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BitString(bits.into_iter().collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn child(&self, bit: bool) -> BitString {
        let mut c = self.clone();
        c.push(bit);
        c
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Bits of `value`, most significant first, exactly `width` long.
    pub fn from_uint(value: u64, width: usize) -> BitString {
        BitString((0..width).rev().map(|i| (value >> i) & 1 == 1).collect())
    }
}

/// The `index`-th bit string in length-lexicographic order, counting from 0:
/// ε, 0, 1, 00, 01, 10, 11, 000, ...
///
/// Writing `index + 1` in binary and dropping the leading one gives the string.
pub fn input_for_index(index: u64) -> BitString {
    let n = index + 1;
    let width = 63 - n.leading_zeros() as usize;
    BitString::from_uint(n, width)
}

/// Inverse of [`input_for_index`].
pub fn index_of_input(input: &BitString) -> u64 {
    input
        .bits()
        .iter()
        .fold(1u64, |acc, &b| (acc << 1) | b as u64)
        - 1
}

/// Number of bit strings of length at most `len`: `2^(len+1) - 1`.
pub fn count_up_to_length(len: u32) -> u64 {
    (1u64 << (len + 1)) - 1
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
    type Err = ParseBitsError;

    /// Parses `0`/`1` characters; `ε` or `-` denotes the empty string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "ε" || s == "-" {
            return Ok(BitString::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitsError(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}
