// SPDX-License-Identifier: Apache-2.0

//! Shortened binary Hamming codes, systematic layout.
//!
//! Codeword bit `i` is tagged with a parity-check column `h(i)`, a non-zero
//! `r`-bit value; a word is a codeword iff the XOR of the columns of its set
//! bits (the syndrome) is zero. Layout of an `(n, k = n - r)` code:
//!
//! * bits `0..k` carry the message; their columns are the first `k`
//!   integers `>= 3` that are not powers of two, ascending;
//! * bits `k..n` are parity; bit `k + j` has column `2^j`.
//!
//! For the default `(128, 120)` code the columns are exactly `1..=128`:
//! message bits use the 120 non-powers of two in `3..=127` and parity bits
//! use `1, 2, 4, ..., 128`. A single flipped bit yields its own column as
//! syndrome; syndromes `129..=255` name no bit and are reported as
//! uncorrectable.

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Codeword length of the default code.
pub const CODE_N: usize = 128;
/// Message length of the default code.
pub const CODE_K: usize = 120;
/// Parity bits of the default code.
pub const CODE_R: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingCode {
    n: usize,
    r: usize,
    columns: Vec<u16>,
    /// syndrome -> bit index
    locator: Vec<Option<usize>>,
}

impl Default for HammingCode {
    fn default() -> Self {
        HammingCode::shortened(CODE_N, CODE_R).expect("default parameters are valid")
    }
}

impl HammingCode {
    /// Shortened Hamming code of length `n` with `r` parity bits.
    pub fn shortened(n: usize, r: usize) -> Result<Self> {
        if !(2..=15).contains(&r) || n <= r || n >= (1 << r) {
            return Err(Error::usage(format!(
                "no shortened Hamming code with n = {n}, r = {r}"
            )));
        }
        let k = n - r;
        let mut columns: Vec<u16> = (3u16..).filter(|c| !c.is_power_of_two()).take(k).collect();
        columns.extend((0..r).map(|j| 1u16 << j));

        let mut locator = vec![None; 1 << r];
        for (i, &c) in columns.iter().enumerate() {
            locator[c as usize] = Some(i);
        }
        Ok(HammingCode {
            n,
            r,
            columns,
            locator,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.r
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Parity-check column of codeword bit `i`.
    pub fn column(&self, i: usize) -> u16 {
        self.columns[i]
    }

    /// Bit index whose column equals `syndrome`, if any.
    pub fn locate(&self, syndrome: u16) -> Option<usize> {
        self.locator.get(syndrome as usize).copied().flatten()
    }

    pub fn syndrome(&self, word: &BitVector) -> Result<u16> {
        self.check(word, self.n, "codeword")?;
        Ok(word.iter_ones().fold(0, |s, i| s ^ self.columns[i]))
    }

    /// Systematic encoding: the message followed by `r` parity bits.
    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.check(message, self.k(), "message")?;
        let s = message.iter_ones().fold(0u16, |s, i| s ^ self.columns[i]);
        let mut word = message.clone();
        for j in 0..self.r {
            word.push((s >> j) & 1 == 1);
        }
        Ok(word)
    }

    /// Message bits of a codeword.
    pub fn message(&self, codeword: &BitVector) -> Result<BitVector> {
        self.check(codeword, self.n, "codeword")?;
        codeword.slice(0..self.k())
    }

    /// Nearest codeword assuming at most one bit error.
    ///
    /// Zero syndrome returns the word unchanged; a syndrome equal to some
    /// column flips that bit. Any other syndrome means at least two errors
    /// and is reported as [`Error::Uncorrectable`]. Two errors whose
    /// syndrome happens to be a valid column are miscorrected to a
    /// different codeword; no distance-3 code can detect that.
    pub fn correct(&self, word: &BitVector) -> Result<BitVector> {
        let syndrome = self.syndrome(word)?;
        if syndrome == 0 {
            return Ok(word.clone());
        }
        match self.locate(syndrome) {
            Some(i) => {
                let mut fixed = word.clone();
                fixed.flip(i);
                Ok(fixed)
            }
            None => Err(Error::Uncorrectable { syndrome }),
        }
    }

    fn check(&self, v: &BitVector, expected: usize, what: &'static str) -> Result<()> {
        if v.len() != expected {
            return Err(Error::InvalidLength {
                what,
                expected,
                actual: v.len(),
            });
        }
        Ok(())
    }
}
