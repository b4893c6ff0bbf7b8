//! Prefix-free code for positive integers.
//!
//! Each bit of the binary expansion is written twice and the word ends with
//! `01`, so the code of `k` is `2 * bitlen(k) + 2` bits long.

use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("zero has no self-delimiting code")]
    Zero,
    #[error("malformed self-delimiting code")]
    Malformed,
}

/// Number of bits in the binary expansion of `k` (0 for 0).
pub fn bitlen(k: u64) -> u32 {
    64 - k.leading_zeros()
}

pub fn code_length(k: u64) -> u64 {
    2 * bitlen(k) as u64 + 2
}

pub fn encode_natural(k: u64) -> Result<BitString, CodeError> {
    if k == 0 {
        return Err(CodeError::Zero);
    }
    let mut out = BitString::new();
    for i in (0..bitlen(k)).rev() {
        let bit = (k >> i) & 1 == 1;
        out.push(bit);
        out.push(bit);
    }
    out.push(false);
    out.push(true);
    Ok(out)
}

/// Decodes a codeword at the start of `bits`; returns the value and the
/// number of bits consumed.
pub fn decode_natural(bits: &[bool]) -> Result<(u64, usize), CodeError> {
    let mut decoder = Decoder::new();
    for (i, &b) in bits.iter().enumerate() {
        match decoder.push(b) {
            Decoded::NeedMore => {}
            Decoded::Value(k) => return Ok((k, i + 1)),
            Decoded::Malformed => return Err(CodeError::Malformed),
        }
    }
    Err(CodeError::Malformed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    NeedMore,
    Value(u64),
    Malformed,
}

/// Incremental decoder fed one bit at a time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decoder {
    value: u64,
    digits: u32,
    half: Option<bool>,
    done: bool,
}

impl Decoder {
    pub fn new() -> Self {
        Decoder::default()
    }

    pub fn push(&mut self, bit: bool) -> Decoded {
        if self.done {
            return Decoded::Malformed;
        }
        let Some(first) = self.half.take() else {
            self.half = Some(bit);
            return Decoded::NeedMore;
        };
        match (first, bit) {
            (false, true) if self.digits > 0 => {
                self.done = true;
                Decoded::Value(self.value)
            }
            (false, false) if self.digits > 0 && self.digits < 64 => {
                self.value <<= 1;
                self.digits += 1;
                Decoded::NeedMore
            }
            (true, true) if self.digits < 64 => {
                self.value = (self.value << 1) | 1;
                self.digits += 1;
                Decoded::NeedMore
            }
            _ => {
                self.done = true;
                Decoded::Malformed
            }
        }
    }
}
