// SPDX-License-Identifier: Apache-2.0

//! Packed bit vectors and the SRAM dump format.
//!
//! Bit `i` of a dump lives in 32-bit word `i / 32` at bit `i % 32`, where
//! bit 0 is the least-significant bit of the word. A dump file holds one
//! word per line as eight hex digits, ascending address order:
//!
//! ```text
//! 00000001      <- bit 0 set
//! 80000000      <- bit 63 set
//! ```
//!
//! Byte serialisation ([`BitVector::to_bytes`]) is a separate convention:
//! bit 0 is the most-significant bit of byte 0. It is used for hashing and
//! for the hex encoding of helper data.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Bits per SRAM word in a dump.
pub const WORD_BITS: usize = 32;

/// Ordered, fixed-length sequence of bits.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    // Bits past `len` in the last word are always zero.
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        v.clear_tail();
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = BitVector::default();
        for b in bits {
            v.push(b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    /// # Panics
    /// If `i >= len`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Bitwise XOR. Both operands must have the same length.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a ^ b))
    }

    pub fn and(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a & b))
    }

    pub fn or(&self, other: &BitVector) -> Result<BitVector> {
        self.check_len(other)?;
        Ok(self.zip_words(other, |a, b| a | b))
    }

    /// In-place `self |= other`.
    pub fn or_assign(&mut self, other: &BitVector) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming_distance(&self, other: &BitVector) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Copy of the bits in `range`.
    pub fn slice(&self, range: Range<usize>) -> Result<BitVector> {
        if range.start > range.end || range.end > self.len {
            return Err(Error::usage(format!(
                "range {}..{} out of bounds for {} bits",
                range.start, range.end, self.len
            )));
        }
        let mut out = BitVector::zeros(range.len());
        // Shift word by word rather than bit by bit; windows are sliced
        // out of 120k-bit dumps hundreds of times per enrollment.
        let shift = range.start % 64;
        let first = range.start / 64;
        for (k, dst) in out.words.iter_mut().enumerate() {
            let lo = self.words.get(first + k).copied().unwrap_or(0) >> shift;
            let hi = if shift == 0 {
                0
            } else {
                self.words.get(first + k + 1).copied().unwrap_or(0) << (64 - shift)
            };
            *dst = lo | hi;
        }
        out.clear_tail();
        Ok(out)
    }

    /// Bits at the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Result<BitVector> {
        if let Some(&bad) = positions.iter().find(|&&p| p >= self.len) {
            return Err(Error::usage(format!(
                "position {bad} out of bounds for {} bits",
                self.len
            )));
        }
        Ok(BitVector::from_bools(
            positions.iter().map(|&p| self.get(p)),
        ))
    }

    /// Pack into bytes, bit 0 going to the most-significant bit of byte 0.
    /// A trailing partial byte is zero-padded in its low bits.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in self.iter_ones() {
            out[i / 8] |= 0x80 >> (i % 8);
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes).
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitVector> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::usage(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let mut out = BitVector::zeros(len);
        for i in 0..len {
            if bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Build from SRAM words using the dump addressing convention.
    pub fn from_words(words: &[u32]) -> BitVector {
        let mut out = BitVector::zeros(words.len() * WORD_BITS);
        for (k, pair) in words.chunks(2).enumerate() {
            let lo = pair[0] as u64;
            let hi = pair.get(1).copied().unwrap_or(0) as u64;
            out.words[k] = lo | (hi << 32);
        }
        out
    }

    /// SRAM words using the dump addressing convention. The length must be
    /// a multiple of 32.
    pub fn to_words(&self) -> Result<Vec<u32>> {
        if self.len % WORD_BITS != 0 {
            return Err(Error::usage(format!(
                "{} bits is not a whole number of {WORD_BITS}-bit words",
                self.len
            )));
        }
        Ok((0..self.len / WORD_BITS)
            .map(|k| (self.words[k / 2] >> (32 * (k % 2))) as u32)
            .collect())
    }

    fn check_len(&self, other: &BitVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn zip_words(&self, other: &BitVector, f: impl Fn(u64, u64) -> u64) -> BitVector {
        BitVector {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            len: self.len,
        }
    }

    fn clear_tail(&mut self) {
        let used = self.len % 64;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << used) - 1;
            }
        }
    }
}

/// `0`/`1` characters, bit 0 first.
impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 256 {
            write!(f, "BitVector({self})")
        } else {
            write!(f, "BitVector(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::usage(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVector::from_bools)
    }
}

/// Parse a line-oriented hex dump into a bit vector.
///
/// Blank lines are ignored. Every other line must be exactly eight hex
/// digits (either case); surrounding whitespace is tolerated.
pub fn parse_hex_dump(text: &str) -> Result<BitVector> {
    let mut words = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::DumpParse {
            line: idx + 1,
            message,
        };
        if line.len() != 8 {
            return Err(err(format!(
                "expected 8 hex digits, found {} characters",
                line.len()
            )));
        }
        if !line.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(err(format!("not a hex word: {line:?}")));
        }
        words.push(u32::from_str_radix(line, 16).map_err(|e| err(e.to_string()))?);
    }
    Ok(BitVector::from_words(&words))
}

/// Canonical dump text: uppercase, eight digits, one word per line, each
/// line terminated by `\n`.
pub fn to_hex_dump(bits: &BitVector) -> Result<String> {
    let words = bits.to_words()?;
    let mut out = String::with_capacity(words.len() * 9);
    for w in words {
        out.push_str(&format!("{w:08X}\n"));
    }
    Ok(out)
}
